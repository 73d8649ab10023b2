use crate::imagecore::{dilate, erode, BinaryMask, Trimap, TrimapLabel};
use crate::{Error, Result};

/// Definite foreground is the eroded mask, definite background lies outside
/// the dilated mask, and the band between them is left for the cut.
pub fn mask_to_trimap(mask: &BinaryMask, radius: usize) -> Result<Trimap> {
    if radius == 0 {
        return Err(Error::InvalidParameter("trimap radius must be >= 1".into()));
    }
    let inner = erode(mask, radius);
    let outer = dilate(mask, radius);
    let labels: Vec<TrimapLabel> = inner
        .data()
        .iter()
        .zip(outer.data())
        .map(|(&i, &o)| match (i, o) {
            (true, _) => TrimapLabel::Fg,
            (false, true) => TrimapLabel::Unknown,
            (false, false) => TrimapLabel::Bg,
        })
        .collect();
    if labels.iter().all(|&l| l == TrimapLabel::Bg) {
        return Err(Error::DegenerateMask);
    }
    Ok(Trimap {
        width: mask.width(),
        height: mask.height(),
        labels,
    })
}
