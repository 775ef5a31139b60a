//! Chinese word segmentation that feeds an MMSEG rough segmentation into a
//! linear-chain CRF.
//!
//! Raw sentences are first segmented by complex MMSEG over a lexicon. The
//! resulting BMES tags become a second observation column next to the
//! characters, and a CRF trained with CRF++-style feature templates
//! assigns the final tags.
//!
//! ```
//! use jointseg::corpus::Segmentation;
//! use jointseg::crf::{train, TrainConfig};
//! use jointseg::lexicon::Lexicon;
//! use jointseg::pipeline::{make_training_grids, segment_text};
//! use jointseg::template::preset;
//!
//! let corpus = vec![
//!     Segmentation::new(["我们", "是", "学生"]),
//!     Segmentation::new(["他们", "是", "老师"]),
//! ];
//! let lex = Lexicon::from_words(["我们", "学生"]);
//! let grids = make_training_grids(&corpus, &lex, None)?;
//! let model = train(&grids, &preset("exp4")?, &TrainConfig::default())?;
//! let out = segment_text(&model, &lex, &["我们是学生"], None)?;
//! assert_eq!(out[0].words, ["我们", "是", "学生"]);
//! # Ok::<(), jointseg::Error>(())
//! ```

pub mod cli;
pub mod corpus;
pub mod crf;
pub mod error;
pub mod eval;
mod fsutil;
pub mod lexicon;
pub mod mmseg;
pub mod pipeline;
pub mod template;

pub use error::{Error, Result};
