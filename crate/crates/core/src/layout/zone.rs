//! Text-block zones and the `.uzn` zone-file format.
//!
//! A zone file holds one zone per line: `left top width height kind`,
//! whitespace separated, pixel units. Blank lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{BBox, LayoutError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zone {
    pub left: u32,
    pub top: u32,
    pub width: u32,
    pub height: u32,
    pub kind: String,
}

impl Zone {
    /// The whole page as a single text block.
    pub fn whole_page(width: usize, height: usize) -> Self {
        Self {
            left: 0,
            top: 0,
            width: width as u32,
            height: height as u32,
            kind: "Text".to_string(),
        }
    }

    pub fn bbox(&self) -> BBox {
        BBox::new(
            self.left as i32,
            self.top as i32,
            (self.left + self.width) as i32,
            (self.top + self.height) as i32,
        )
    }

    /// True when the centre of `b` lies inside the zone.
    pub fn contains_center_of(&self, b: &BBox) -> bool {
        let z = self.bbox();
        let (cx2, cy2) = (b.center_x2(), b.center_y2());
        cx2 >= 2 * z.left && cx2 < 2 * z.right && cy2 >= 2 * z.top && cy2 < 2 * z.bottom
    }

    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        self.width > 0
            && self.height > 0
            && (self.left + self.width) as usize <= width
            && (self.top + self.height) as usize <= height
    }
}

pub fn parse_uzn(text: &str) -> Result<Vec<Zone>, LayoutError> {
    let mut zones = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(LayoutError::Uzn {
                line: lineno + 1,
                message: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let num = |i: usize| -> Result<u32, LayoutError> {
            fields[i].parse().map_err(|_| LayoutError::Uzn {
                line: lineno + 1,
                message: format!("invalid number {:?}", fields[i]),
            })
        };
        zones.push(Zone {
            left: num(0)?,
            top: num(1)?,
            width: num(2)?,
            height: num(3)?,
            kind: fields[4].to_string(),
        });
    }
    Ok(zones)
}

pub fn format_uzn(zones: &[Zone]) -> String {
    let mut s = String::new();
    for z in zones {
        let _ = writeln!(s, "{} {} {} {} {}", z.left, z.top, z.width, z.height, z.kind);
    }
    s
}

/// Zones for a page: the zone file when given, otherwise the whole page.
/// Zones that fall outside the page are rejected.
pub fn load_zones(path: Option<&Path>, width: usize, height: usize) -> Result<Vec<Zone>, LayoutError> {
    let Some(path) = path else {
        return Ok(vec![Zone::whole_page(width, height)]);
    };
    let text = std::fs::read_to_string(path).map_err(|e| LayoutError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let zones = parse_uzn(&text)?;
    if let Some(bad) = zones.iter().find(|z| !z.fits_in(width, height)) {
        return Err(LayoutError::ZoneOutOfBounds(bad.clone()));
    }
    if zones.is_empty() {
        return Ok(vec![Zone::whole_page(width, height)]);
    }
    Ok(zones)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_five_field_lines() {
        let zones = parse_uzn("10 20 300 400 Text\n\n0 0 5 5 Caption\n").unwrap();
        assert_eq!(zones.len(), 2);
        assert_eq!(zones[0].bbox(), BBox::new(10, 20, 310, 420));
        assert_eq!(zones[1].kind, "Caption");
        assert_eq!(parse_uzn(&format_uzn(&zones)).unwrap(), zones);
    }

    #[test]
    fn rejects_short_lines_and_bad_numbers() {
        assert!(parse_uzn("1 2 3 Text").is_err());
        assert!(parse_uzn("1 2 x 4 Text").is_err());
    }

    #[test]
    fn missing_file_means_whole_page() {
        let zones = load_zones(None, 640, 480).unwrap();
        assert_eq!(zones, vec![Zone::whole_page(640, 480)]);
    }
}
