//! Registry of the shipped `reproduce` configurations.

pub const FIGURE_IDS: [&str; 6] = ["fig2", "fig3a", "fig3b", "fig3c", "figS2", "figS3"];

/// Built-in config text for a figure id.
pub fn builtin_config(id: &str) -> Option<&'static str> {
    Some(match id {
        "fig2" => include_str!("../../configs/fig2.conf"),
        "fig3a" => include_str!("../../configs/fig3a.conf"),
        "fig3b" => include_str!("../../configs/fig3b.conf"),
        "fig3c" => include_str!("../../configs/fig3c.conf"),
        "figS2" => include_str!("../../configs/figS2.conf"),
        "figS3" => include_str!("../../configs/figS3.conf"),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{FigureConfig, KvConfig};

    #[test]
    fn every_builtin_parses() {
        for id in FIGURE_IDS {
            let kv = KvConfig::parse(builtin_config(id).unwrap(), id).unwrap();
            let fig = FigureConfig::from_kv(&kv, "data".into()).unwrap();
            assert_eq!(fig.figure, id);
        }
        assert!(builtin_config("fig9").is_none());
    }
}
