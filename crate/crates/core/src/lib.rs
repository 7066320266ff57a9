pub mod classify;
pub mod decode;
pub mod eval;
pub mod features;
pub mod layout;
pub mod pipeline;
pub mod preprocess;
pub mod script;
