//! Length-prefixed frame transports.

use std::io::{self, Read, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::sync::mpsc::{channel, Receiver, Sender};

use crate::config::TransportMode;
use crate::error::ProtocolError;
use crate::wire::MAX_FRAME_BYTES;

/// Writes `body` as one frame.
pub fn write_frame<W: Write>(w: &mut W, body: &[u8]) -> Result<(), ProtocolError> {
    if body.len() > MAX_FRAME_BYTES {
        return Err(ProtocolError::FrameTooLarge { size: body.len(), limit: MAX_FRAME_BYTES });
    }
    let len = u32::try_from(body.len()).expect("bounded by the cap");
    w.write_all(&len.to_be_bytes())?;
    w.write_all(body)?;
    w.flush()?;
    Ok(())
}

/// Reads one frame; a clean EOF before the header maps to [`ProtocolError::Disconnected`].
pub fn read_frame<R: Read>(r: &mut R) -> Result<Vec<u8>, ProtocolError> {
    let mut header = [0u8; 4];
    r.read_exact(&mut header).map_err(eof_to_disconnect)?;
    let len = u32::from_be_bytes(header) as usize;
    if len > MAX_FRAME_BYTES {
        return Err(ProtocolError::FrameTooLarge { size: len, limit: MAX_FRAME_BYTES });
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body).map_err(eof_to_disconnect)?;
    Ok(body)
}

fn eof_to_disconnect(e: io::Error) -> ProtocolError {
    match e.kind() {
        io::ErrorKind::UnexpectedEof | io::ErrorKind::ConnectionReset | io::ErrorKind::BrokenPipe => {
            ProtocolError::Disconnected
        }
        _ => ProtocolError::Io(e),
    }
}

/// One side of a framed, ordered, reliable connection.
#[derive(Debug)]
pub enum FrameEndpoint {
    InProc { tx: Sender<Vec<u8>>, rx: Receiver<Vec<u8>> },
    Tcp(TcpStream),
}

impl FrameEndpoint {
    pub fn send_frame(&mut self, body: &[u8]) -> Result<(), ProtocolError> {
        match self {
            FrameEndpoint::InProc { tx, .. } => {
                let mut framed = Vec::with_capacity(body.len() + 4);
                write_frame(&mut framed, body)?;
                tx.send(framed).map_err(|_| ProtocolError::Disconnected)
            }
            FrameEndpoint::Tcp(s) => write_frame(s, body).map_err(|e| match e {
                ProtocolError::Io(io) => eof_to_disconnect(io),
                other => other,
            }),
        }
    }

    pub fn recv_frame(&mut self) -> Result<Vec<u8>, ProtocolError> {
        match self {
            FrameEndpoint::InProc { rx, .. } => {
                let framed = rx.recv().map_err(|_| ProtocolError::Disconnected)?;
                read_frame(&mut framed.as_slice())
            }
            FrameEndpoint::Tcp(s) => read_frame(s),
        }
    }

    /// Drops the connection; the peer's next receive reports a disconnect.
    pub fn close(self) {
        if let FrameEndpoint::Tcp(s) = &self {
            let _ = s.shutdown(Shutdown::Both);
        }
    }
}

/// A connected `(verifier, prover)` endpoint pair. TCP binds an ephemeral
/// loopback port.
pub fn transport_pair(mode: TransportMode) -> Result<(FrameEndpoint, FrameEndpoint), ProtocolError> {
    match mode {
        TransportMode::InProc | TransportMode::Local => {
            let (to_prover, from_verifier) = channel();
            let (to_verifier, from_prover) = channel();
            Ok((
                FrameEndpoint::InProc { tx: to_prover, rx: from_prover },
                FrameEndpoint::InProc { tx: to_verifier, rx: from_verifier },
            ))
        }
        TransportMode::Tcp => {
            let listener = TcpListener::bind("127.0.0.1:0")?;
            let prover = TcpStream::connect(listener.local_addr()?)?;
            let (verifier, _) = listener.accept()?;
            verifier.set_nodelay(true)?;
            prover.set_nodelay(true)?;
            Ok((FrameEndpoint::Tcp(verifier), FrameEndpoint::Tcp(prover)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_layout() {
        let mut buf = Vec::new();
        write_frame(&mut buf, b"{}").unwrap();
        assert_eq!(buf, [0, 0, 0, 2, b'{', b'}']);
        assert_eq!(read_frame(&mut buf.as_slice()).unwrap(), b"{}");
    }

    #[test]
    fn oversized_frames_rejected() {
        let big = vec![0u8; MAX_FRAME_BYTES + 1];
        assert!(matches!(write_frame(&mut Vec::new(), &big), Err(ProtocolError::FrameTooLarge { .. })));
        let header = ((MAX_FRAME_BYTES + 1) as u32).to_be_bytes();
        assert!(matches!(read_frame(&mut header.as_slice()), Err(ProtocolError::FrameTooLarge { .. })));
    }

    #[test]
    fn truncated_frame_is_a_disconnect() {
        assert!(matches!(read_frame(&mut [0u8, 0, 0, 5, 1].as_slice()), Err(ProtocolError::Disconnected)));
        assert!(matches!(read_frame(&mut [].as_slice()), Err(ProtocolError::Disconnected)));
    }

    #[test]
    fn pairs_deliver_in_order() {
        for mode in [TransportMode::InProc, TransportMode::Tcp] {
            let (mut v, mut p) = transport_pair(mode).unwrap();
            v.send_frame(b"one").unwrap();
            v.send_frame(b"two").unwrap();
            assert_eq!(p.recv_frame().unwrap(), b"one");
            assert_eq!(p.recv_frame().unwrap(), b"two");
            p.send_frame(b"back").unwrap();
            assert_eq!(v.recv_frame().unwrap(), b"back");
            p.close();
            assert!(matches!(v.recv_frame(), Err(ProtocolError::Disconnected)));
        }
    }
}
