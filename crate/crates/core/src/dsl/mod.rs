//! The DSL: values, semantic types, the function catalog and its runtime.

mod builtins;
pub mod catalog;
pub mod registry;
pub mod types;
pub mod value;

pub use catalog::{FunctionSpec, Param};
pub use registry::{apply, bind_arguments, closure_arity, CallArg, DslError, Registry, Resolver};
pub use types::{Kinds, SemType};
pub use value::{render_value, Closure, Value};
