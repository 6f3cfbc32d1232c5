//! Canonical filetype derivation by majority vote over three report fields:
//! the trid detector string, the tag list, and the meaningful filename.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::Path;

/// Maps raw filetype evidence to canonical filetype names.
///
/// Trid rules are ordered case-insensitive substring patterns (first match
/// wins); extensions and tags are exact lowercase lookups.
#[derive(Debug, Clone, Default)]
pub struct FiletypeMapping {
    trid_rules: Vec<(String, String)>,
    ext_map: HashMap<String, String>,
    tag_map: HashMap<String, String>,
}

impl FiletypeMapping {
    /// Built-in mapping covering the common feed filetypes (peexe,
    /// javascript, html, pdf, apk, text, zip, dex, gzip, lnk, elf, rar, jar,
    /// doc, xls, macho, php, xml, powershell).
    pub fn builtin() -> Self {
        let mut m = Self::default();
        // order matters: more specific patterns first
        for (pat, canon) in [
            ("win32 executable", "peexe"),
            ("win64 executable", "peexe"),
            ("win16", "peexe"),
            ("win32 dynamic link library", "peexe"),
            ("win64 dynamic link library", "peexe"),
            ("dynamic link library", "peexe"),
            ("windows control panel", "peexe"),
            ("windows screen saver", "peexe"),
            ("windows activex control", "peexe"),
            ("dos executable", "peexe"),
            ("dos borland compiled executable", "peexe"),
            ("os/2 executable", "peexe"),
            ("generic cil executable", "peexe"),
            ("inno setup installer", "peexe"),
            ("installshield setup", "peexe"),
            ("nullsoft scriptable install system", "peexe"),
            ("microsoft visual c++ compiled executable", "peexe"),
            ("upx compressed win", "peexe"),
            ("pecompact compressed", "peexe"),
            ("aspack compressed win32", "peexe"),
            ("mingw32", "peexe"),
            ("java script", "javascript"),
            ("javascript", "javascript"),
            ("hypertext markup language", "html"),
            ("adobe portable document format", "pdf"),
            ("android package", "apk"),
            ("plain text", "text"),
            ("text/ascii", "text"),
            ("zip compressed archive", "zip"),
            ("dalvik dex", "dex"),
            ("dalvik", "dex"),
            ("gzipped data", "gzip"),
            ("gzip", "gzip"),
            ("windows shortcut", "lnk"),
            ("elf executable", "elf"),
            ("elf shared library", "elf"),
            ("winrar self extracting", "rar"),
            ("rar compressed archive", "rar"),
            ("java archive", "jar"),
            ("microsoft word", "doc"),
            ("word microsoft office", "doc"),
            ("microsoft excel", "xls"),
            ("excel microsoft office", "xls"),
            ("mach-o", "macho"),
            ("php script", "php"),
            ("extensible markup language", "xml"),
            ("powershell", "powershell"),
        ] {
            m.trid_rules.push((pat.to_string(), canon.to_string()));
        }
        for (ext, canon) in [
            ("exe", "peexe"), ("dll", "peexe"), ("ocx", "peexe"), ("cpl", "peexe"),
            ("scr", "peexe"), ("sys", "peexe"), ("drv", "peexe"), ("msi", "peexe"),
            ("js", "javascript"), ("jse", "javascript"),
            ("html", "html"), ("htm", "html"),
            ("pdf", "pdf"),
            ("apk", "apk"),
            ("txt", "text"), ("text", "text"),
            ("zip", "zip"),
            ("dex", "dex"),
            ("gz", "gzip"), ("gzip", "gzip"), ("tgz", "gzip"),
            ("lnk", "lnk"),
            ("so", "elf"), ("elf", "elf"),
            ("rar", "rar"),
            ("jar", "jar"),
            ("doc", "doc"), ("docx", "doc"), ("docm", "doc"), ("rtf", "doc"),
            ("xls", "xls"), ("xlsx", "xls"), ("xlsm", "xls"), ("xlsb", "xls"),
            ("dylib", "macho"),
            ("php", "php"),
            ("xml", "xml"),
            ("ps1", "powershell"), ("psm1", "powershell"),
        ] {
            m.ext_map.insert(ext.to_string(), canon.to_string());
        }
        for (tag, canon) in [
            ("peexe", "peexe"), ("pedll", "peexe"), ("executable", "peexe"),
            ("assembly", "peexe"), ("64bits", "peexe"),
            ("javascript", "javascript"), ("js", "javascript"),
            ("html", "html"),
            ("pdf", "pdf"),
            ("apk", "apk"), ("android", "apk"),
            ("text", "text"),
            ("zip", "zip"),
            ("dex", "dex"),
            ("gzip", "gzip"),
            ("lnk", "lnk"),
            ("elf", "elf"),
            ("rar", "rar"),
            ("jar", "jar"),
            ("doc", "doc"), ("docx", "doc"),
            ("xls", "xls"), ("xlsx", "xls"),
            ("macho", "macho"),
            ("php", "php"),
            ("xml", "xml"),
            ("powershell", "powershell"), ("ps1", "powershell"),
        ] {
            m.tag_map.insert(tag.to_string(), canon.to_string());
        }
        m
    }

    /// Loads a mapping from the editable text format: one rule per line,
    /// `kind<TAB>pattern<TAB>canonical` with kind in {trid, ext, tag};
    /// `#` comments and blank lines ignored.
    pub fn from_path(path: &Path) -> io::Result<Self> {
        let mut m = Self::default();
        for (no, line) in fs::read_to_string(path)?.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(3, '\t');
            let (kind, pat, canon) = match (parts.next(), parts.next(), parts.next()) {
                (Some(k), Some(p), Some(c)) => (k, p.trim().to_lowercase(), c.trim().to_lowercase()),
                _ => {
                    return Err(io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("{}:{}: expected kind<TAB>pattern<TAB>canonical", path.display(), no + 1),
                    ))
                }
            };
            match kind {
                "trid" => m.trid_rules.push((pat, canon)),
                "ext" => {
                    m.ext_map.insert(pat, canon);
                }
                "tag" => {
                    m.tag_map.insert(pat, canon);
                }
                other => {
                    return Err(io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("{}:{}: unknown rule kind {other:?}", path.display(), no + 1),
                    ))
                }
            }
        }
        Ok(m)
    }

    pub fn map_trid(&self, trid: &str) -> Option<&str> {
        let lowered = trid.to_lowercase();
        self.trid_rules
            .iter()
            .find(|(pat, _)| lowered.contains(pat))
            .map(|(_, canon)| canon.as_str())
    }

    pub fn map_extension(&self, ext: &str) -> Option<&str> {
        self.ext_map.get(&ext.to_lowercase()).map(String::as_str)
    }

    pub fn map_tag(&self, tag: &str) -> Option<&str> {
        self.tag_map.get(&tag.to_lowercase()).map(String::as_str)
    }
}

fn extension_of(name: &str) -> Option<&str> {
    let idx = name.rfind('.')?;
    let ext = &name[idx + 1..];
    if ext.is_empty() { None } else { Some(ext) }
}

/// The tag-list vote: lexicographically smallest canonical value mapped from
/// any tag, so the vote never depends on tag order.
fn tags_vote<'a>(tags: &[String], mapping: &'a FiletypeMapping) -> Option<&'a str> {
    tags.iter().filter_map(|t| mapping.map_tag(t)).min()
}

/// Majority vote over the three evidence sources. A value backed by two or
/// more sources wins; otherwise the first available source in priority order
/// trid > tags > name decides; NULL when every source abstains.
pub fn derive_filetype(
    trid: Option<&str>,
    tags: &[String],
    name: Option<&str>,
    mapping: &FiletypeMapping,
) -> Option<String> {
    let trid_vote = trid.and_then(|t| mapping.map_trid(t));
    let tag_vote = tags_vote(tags, mapping);
    let name_vote = name.and_then(extension_of).and_then(|e| mapping.map_extension(e));

    let votes = [trid_vote, tag_vote, name_vote];
    for v in votes.iter().flatten() {
        if votes.iter().filter(|o| o.as_deref() == Some(v)).count() >= 2 {
            return Some(v.to_string());
        }
    }
    votes.into_iter().flatten().next().map(String::from)
}
