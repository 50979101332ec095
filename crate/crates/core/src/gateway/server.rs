//! TCP transport: one thread and one [`Session`] per connection.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use super::{MenuLibrary, Outbound, Session};
use crate::config::Config;
use crate::error::Result;

/// Accepts connections until the listener fails.
pub fn serve(listener: TcpListener, menus: Arc<MenuLibrary>, defaults: Config) -> Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let menus = menus.clone();
        thread::spawn(move || {
            // Connection errors only end that connection.
            let _ = handle_connection(stream, menus, defaults);
        });
    }
    Ok(())
}

fn handle_connection(stream: TcpStream, menus: Arc<MenuLibrary>, defaults: Config) -> Result<()> {
    let reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let mut session = Session::new(menus, defaults);
    let send = |writer: &mut BufWriter<TcpStream>, out: Vec<Outbound>| -> Result<()> {
        for msg in out {
            writer.write_all(msg.to_line().as_bytes())?;
            writer.write_all(b"\n")?;
        }
        writer.flush()?;
        Ok(())
    };
    for line in reader.lines() {
        let out = match line {
            Ok(line) => session.handle_line(&line),
            Err(e) if e.kind() == std::io::ErrorKind::InvalidData => {
                vec![Outbound::error("malformed", "line is not valid UTF-8")]
            }
            Err(e) => return Err(e.into()),
        };
        send(&mut writer, out)?;
    }
    // Client closed its side; flush whatever the open cycles produce.
    let _ = send(&mut writer, session.finish());
    Ok(())
}

pub struct ServerHandle {
    pub addr: SocketAddr,
    _thread: JoinHandle<()>,
}

/// Binds `addr` and serves on a background thread.
pub fn spawn_server(addr: &str, menus: Arc<MenuLibrary>, defaults: Config) -> Result<ServerHandle> {
    let listener = TcpListener::bind(addr)?;
    let addr = listener.local_addr()?;
    let thread = thread::spawn(move || {
        let _ = serve(listener, menus, defaults);
    });
    Ok(ServerHandle {
        addr,
        _thread: thread,
    })
}
