//! The HTTP adapter: dialected GET responses, a serving endpoint, and a
//! verifying client.

mod client;
mod dialect;
mod message;
mod server;

pub use client::{HttpClient, HttpClientConfig, HttpTransferResult};
pub use dialect::{
    http_dialect_decode, http_dialect_respond, http_message_features, http_shape_dataset,
    http_verify_response, HttpDialect, HttpVerdict, HTTP_DIALECT_COUNT, RESPONSE_SEGMENTS,
};
pub use message::{parse_request_line, HttpMessage};
pub use server::{spawn_http_server, HttpServerConfig, HttpServerHandle, DEFAULT_HTTP_PORT};
