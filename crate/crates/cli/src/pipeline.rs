//! Shared image-to-barcode path used by every subcommand.

use std::path::Path;

use anyhow::Context;
use rbc_core::barcode::{encode_minmax, encode_threshold, Barcode, EncoderKind};
use rbc_core::imaging::{load_grayscale, normalize, GrayImage};
use rbc_core::radon::{project, ProjectionSet};
use rbc_core::Index;

use crate::UsageError;

pub const DEFAULT_MINMAX_WINDOW: usize = 5;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct EncodeParams {
    pub encoder: EncoderKind,
    pub angles: usize,
    pub side: usize,
    /// 0 for the threshold encoder, the odd smoothing window otherwise.
    pub window: usize,
}

impl EncodeParams {
    /// Resolves CLI flags into concrete parameters. The threshold encoder
    /// has no smoothing stage, so an explicit window is a usage error there.
    pub fn resolve_cli(
        encoder: EncoderKind,
        angles: usize,
        side: usize,
        window: Option<usize>,
    ) -> anyhow::Result<Self> {
        let window = match (encoder, window) {
            (EncoderKind::Threshold, None) => 0,
            (EncoderKind::Threshold, Some(_)) => {
                return Err(UsageError(
                    "--window only applies to the minmax encoder".to_string(),
                )
                .into());
            }
            (EncoderKind::MinMax, None) => DEFAULT_MINMAX_WINDOW,
            (EncoderKind::MinMax, Some(w)) => w,
        };
        Ok(EncodeParams {
            encoder,
            angles,
            side,
            window,
        })
    }

    /// Parameters an existing index was built with; queries must reuse them
    /// or their barcodes would not be comparable.
    pub fn of_index(index: &Index) -> Self {
        EncodeParams {
            encoder: index.encoder(),
            angles: index.num_angles(),
            side: index.image_side(),
            window: index.smoothing_window(),
        }
    }
}

pub fn encode_image(
    image: &GrayImage,
    params: EncodeParams,
) -> anyhow::Result<(GrayImage, ProjectionSet, Barcode)> {
    let square = normalize(image, params.side, params.side)?;
    let projections = project(&square, params.angles)?;
    let barcode = match params.encoder {
        EncoderKind::Threshold => encode_threshold(&projections),
        EncoderKind::MinMax => encode_minmax(&projections, params.window)?,
    };
    Ok((square, projections, barcode))
}

pub fn encode_image_file(
    path: &Path,
    params: EncodeParams,
) -> anyhow::Result<(GrayImage, ProjectionSet, Barcode)> {
    let image =
        load_grayscale(path).with_context(|| format!("cannot load image {}", path.display()))?;
    encode_image(&image, params).with_context(|| format!("cannot encode {}", path.display()))
}
