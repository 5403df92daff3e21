//! Test support: a scripted in-process HTTP server, mock LLM behaviors, and
//! a synthetic patent-portal fixture.

pub mod llm;
pub mod portal;
pub mod server;

pub use llm::{auto_llm, content_response, grade_response, tool_call_response, ScriptedLlm};
pub use portal::{portal_handler, standard_fixture, FixtureApplication};
pub use server::{MockServer, Request, Response};
