//! Report rendering: human console output and JUnit-schema XML for CI.

mod console;
mod junit;

pub use console::{render_console, ConsoleOptions};
pub use junit::render_junit_xml;
