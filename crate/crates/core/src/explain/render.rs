//! Explanation rendering: JSON always, optional HTML report pages.
//!
//! Tabular pages use green bars for weights pushing toward survival and
//! red for death; text pages highlight survival words in orange and death
//! words in blue.

use std::str::FromStr;

use super::tabular::TabularExplanation;
use super::text::TextExplanation;
use crate::error::{Error, Result};
use crate::text::preprocess;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Json,
    Html,
}

impl RenderFormat {
    pub fn extension(self) -> &'static str {
        match self {
            RenderFormat::Json => "json",
            RenderFormat::Html => "html",
        }
    }
}

impl FromStr for RenderFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<RenderFormat> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(RenderFormat::Json),
            "html" => Ok(RenderFormat::Html),
            other => Err(Error::InvalidConfig(format!(
                "unknown explanation format {other:?}; supported formats: json, html"
            ))),
        }
    }
}

const NO_SALIENT: &str = "no salient features";

fn html_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn page(title: &str, body: &str) -> String {
    format!(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>{}</title>\n\
         <style>body{{font-family:sans-serif;max-width:48em;margin:2em auto}}\
         .bar{{height:1em;display:inline-block;vertical-align:middle}}\
         .pos{{background:#2e7d32}}.neg{{background:#c62828}}\
         .row{{margin:0.3em 0}}.cond{{display:inline-block;width:24em;\
         font-family:monospace;font-size:0.9em}}\
         .meta{{color:#666;font-size:0.85em}}</style></head><body>\n{}\n</body></html>\n",
        html_escape(title),
        body
    )
}

pub fn render_tabular(e: &TabularExplanation, format: RenderFormat) -> Result<String> {
    match format {
        RenderFormat::Json => Ok(serde_json::to_string_pretty(e)?),
        RenderFormat::Html => {
            let class = if e.predicted_survived { "survived" } else { "dead" };
            let mut body = format!(
                "<h1>{}</h1><p>Predicted <b>{class}</b> with probability {:.3}.</p>\n",
                html_escape(&e.instance_id),
                e.probability
            );
            let max_w = e
                .entries
                .iter()
                .map(|x| x.weight.abs())
                .fold(0.0f64, f64::max);
            if max_w < 1e-12 {
                body.push_str(&format!("<p><i>{NO_SALIENT}</i></p>\n"));
            } else {
                for entry in &e.entries {
                    let width = (entry.weight.abs() / max_w * 200.0).round();
                    let class = if entry.weight >= 0.0 { "pos" } else { "neg" };
                    body.push_str(&format!(
                        "<div class=\"row\"><span class=\"cond\">{}</span>\
                         <span class=\"bar {class}\" style=\"width:{width}px\"></span> \
                         {:+.4}</div>\n",
                        html_escape(&entry.condition),
                        entry.weight
                    ));
                }
            }
            body.push_str(&format!(
                "<p class=\"meta\">local fit R&sup2; = {:.3}, kernel width {:.3}, \
                 {} samples, seed {}</p>",
                e.local_fit_r2, e.kernel_width, e.num_samples, e.seed
            ));
            Ok(page(&format!("Explanation for {}", e.instance_id), &body))
        }
    }
}

pub fn render_text(e: &TextExplanation, source_text: &str, format: RenderFormat) -> Result<String> {
    match format {
        RenderFormat::Json => Ok(serde_json::to_string_pretty(e)?),
        RenderFormat::Html => {
            let class = if e.predicted_survived { "survived" } else { "dead" };
            let max_w = e
                .word_weights
                .iter()
                .map(|w| w.weight.abs())
                .fold(0.0f64, f64::max);
            let mut body = format!(
                "<h1>Review {}</h1><p>Predicted <b>{class}</b> with probability {:.3}.</p>\n<p>",
                html_escape(&e.review_id),
                e.probability
            );
            if max_w < 1e-12 {
                body.push_str(&html_escape(source_text));
                body.push_str(&format!("</p>\n<p><i>{NO_SALIENT}</i></p>\n"));
            } else {
                // Highlight weighted tokens inside the preprocessed stream.
                for token in preprocess(source_text) {
                    match e.word_weights.iter().find(|w| w.token == token) {
                        Some(w) => {
                            let alpha = (w.weight.abs() / max_w * 0.8 + 0.2).min(1.0);
                            // Orange pushes toward survival, blue toward death.
                            let color = if w.weight >= 0.0 {
                                format!("rgba(255,152,0,{alpha:.2})")
                            } else {
                                format!("rgba(33,150,243,{alpha:.2})")
                            };
                            body.push_str(&format!(
                                "<span style=\"background:{color}\">{}</span> ",
                                html_escape(&token)
                            ));
                        }
                        None => {
                            body.push_str(&html_escape(&token));
                            body.push(' ');
                        }
                    }
                }
                body.push_str("</p>\n");
            }
            body.push_str(&format!(
                "<p class=\"meta\">local fit R&sup2; = {:.3}, {} samples, seed {}</p>",
                e.local_fit_r2, e.num_samples, e.seed
            ));
            Ok(page(&format!("Explanation for review {}", e.review_id), &body))
        }
    }
}
