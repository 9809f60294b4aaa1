//! Optional real-socket mode: a minimal HTTP/1.1 listener over `std::net`.
//!
//! The default transport is simulated (construct a [`Request`], call
//! [`Cluster::handle`]); this listener exists so the same API can be exercised
//! over an actual socket. It is deliberately small: one connection at a time,
//! `Connection: close` semantics, JSON bodies only. After answering each
//! request the serving loop settles the network, standing in for the
//! background progress a real validator makes between client calls.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::time::Duration;

use crate::api::{Request, Response};
use crate::error::ServiceError;
use crate::service::Cluster;

/// Accepts and answers requests against one node. `max_requests` bounds the
/// loop for tests and scripted runs; `None` serves until the process exits.
pub fn serve(
    cluster: &mut Cluster,
    node: usize,
    listener: TcpListener,
    max_requests: Option<usize>,
) -> Result<(), ServiceError> {
    let mut served = 0usize;
    loop {
        if let Some(limit) = max_requests {
            if served >= limit {
                return Ok(());
            }
        }
        let (stream, _) = listener.accept()?;
        // A broken client connection should not take the server down.
        let _ = answer(cluster, node, stream);
        cluster.settle();
        served += 1;
    }
}

fn answer(cluster: &mut Cluster, node: usize, stream: TcpStream) -> std::io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(5)))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let (method, target, body) = read_request(&mut reader)?;
    let (code, payload) = match Request::from_http(&method, &target, &body) {
        Ok(request) => {
            let response = cluster.handle(node, request);
            (response.status_code(), response.to_json())
        }
        Err(reason) => {
            let code = if reason.starts_with("no route") { 404 } else { 400 };
            (code, Response::Error { reason }.to_json())
        }
    };
    write_response(stream, code, &payload)
}

/// Parses one request: request line, headers (only `Content-Length` is
/// honored), then the body.
fn read_request(reader: &mut impl BufRead) -> std::io::Result<(String, String, String)> {
    let bad = |detail: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, detail);

    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut parts = request_line.split_whitespace();
    let method = parts.next().ok_or_else(|| bad("empty request line"))?.to_string();
    let target = parts.next().ok_or_else(|| bad("request line has no target"))?.to_string();

    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            return Err(bad("connection closed inside headers"));
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                content_length = value
                    .trim()
                    .parse()
                    .map_err(|_| bad("unparseable content-length"))?;
            }
        }
    }

    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    let body = String::from_utf8(body).map_err(|_| bad("body is not UTF-8"))?;
    Ok((method, target, body))
}

fn write_response(mut stream: TcpStream, code: u16, body: &str) -> std::io::Result<()> {
    let reason = match code {
        200 => "OK",
        202 => "Accepted",
        400 => "Bad Request",
        404 => "Not Found",
        _ => "",
    };
    write!(
        stream,
        "HTTP/1.1 {code} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len(),
    )?;
    stream.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn requests_parse_from_raw_bytes() {
        let raw = "POST /batches HTTP/1.1\r\nHost: x\r\nContent-Length: 4\r\n\r\n{\"a\"";
        let (method, target, body) = read_request(&mut Cursor::new(raw)).unwrap();
        assert_eq!(method, "POST");
        assert_eq!(target, "/batches");
        assert_eq!(body, "{\"a\"");

        let raw = "GET /state?prefix=ab HTTP/1.1\r\n\r\n";
        let (method, target, body) = read_request(&mut Cursor::new(raw)).unwrap();
        assert_eq!(method, "GET");
        assert_eq!(target, "/state?prefix=ab");
        assert!(body.is_empty());
    }

    #[test]
    fn truncated_requests_error_instead_of_hanging() {
        let raw = "POST /batches HTTP/1.1\r\nContent-Length: 10\r\n\r\nshort";
        assert!(read_request(&mut Cursor::new(raw)).is_err());
        assert!(read_request(&mut Cursor::new("\r\n")).is_err());
    }
}
