//! Library half of the `pdnet` binary: the HTTP service, exposed so it can
//! be tested without binding a socket.

pub mod server;
