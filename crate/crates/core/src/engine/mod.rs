//! In-memory property graph and the query executor.

mod exec;
mod fixture;
mod graph;
mod remote;
mod value;

pub use exec::{execute, Binding, ExecError, ResultTable};
pub use fixture::{fixture, load_graph, parse_graph, FixtureError};
pub use graph::{Edge, GraphError, Node, PropertyGraph};
pub use remote::{execute_remote, ExternalEndpoint, RemoteError};
pub use value::Value;
