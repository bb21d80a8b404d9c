//! Model-agnostic local explanations for tabular and text models.

mod render;
mod ridge;
mod tabular;
mod text;

pub use render::{render_tabular, render_text, RenderFormat};
pub use ridge::{weighted_ridge, RidgeFit};
pub use tabular::{
    explain_tabular, ExplanationEntry, TabularExplainerConfig, TabularExplanation,
};
pub use text::{explain_text, TextExplainerConfig, TextExplanation, WordWeight};
