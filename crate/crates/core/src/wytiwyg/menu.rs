//! Menu fixtures.
//!
//! A fixture is a TOML document listing options in display order; preview
//! paths are resolved relative to the fixture file:
//!
//! ```toml
//! id = "suggest10"
//!
//! [[option]]
//! id = "croatia-boat-trip"
//! label = "croatia boat trip"
//! preview = "../previews/croatia-boat-trip.html"
//! ```

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MenuOption {
    pub id: String,
    pub label: String,
    /// Reference to the pre-rendered preview document.
    pub preview: String,
    /// Contents of the preview document, empty until resolved.
    #[serde(skip)]
    pub document: String,
}

impl MenuOption {
    pub fn new(id: impl Into<String>, label: impl Into<String>) -> Self {
        let id = id.into();
        MenuOption {
            preview: format!("{id}.html"),
            label: label.into(),
            document: String::new(),
            id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct MenuFile {
    #[serde(default)]
    id: Option<String>,
    #[serde(default, rename = "option")]
    options: Vec<MenuOption>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MenuModel {
    pub id: String,
    options: Vec<MenuOption>,
}

const SUGGEST10: &str = include_str!("../../fixtures/menus/suggest10.toml");

macro_rules! previews {
    ($($name:literal),* $(,)?) => {
        &[$(
            (concat!("../previews/", $name, ".html"),
             include_str!(concat!("../../fixtures/previews/", $name, ".html"))),
        )*]
    };
}

const SUGGEST10_PREVIEWS: &[(&str, &str)] = previews![
    "croatia-boat-trip",
    "croatia-zadar",
    "croatia-snorkeling",
    "croatia-islands",
    "croatia-weather",
    "croatia-ferry",
    "croatia-camping",
    "croatia-zadar-boat-trip",
    "croatia-map",
    "croatia-currency",
];

impl MenuModel {
    pub fn new(id: impl Into<String>, options: Vec<MenuOption>) -> Result<Self> {
        if options.is_empty() {
            return Err(Error::InvalidMenu("a menu needs at least one option".into()));
        }
        let mut seen = HashSet::new();
        for o in &options {
            if !seen.insert(o.id.as_str()) {
                return Err(Error::InvalidMenu(format!("duplicate option id {:?}", o.id)));
            }
        }
        Ok(MenuModel {
            id: id.into(),
            options,
        })
    }

    /// Plain numbered menu `item-1 ..= item-n` with one-line previews.
    pub fn numbered(n: usize) -> Result<Self> {
        let options = (1..=n)
            .map(|i| {
                let mut o = MenuOption::new(format!("item-{i}"), format!("Item {i}"));
                o.document = format!("Results for item {i}");
                o
            })
            .collect();
        MenuModel::new(format!("numbered{n}"), options)
    }

    /// Fixtures compiled into the binary, by id.
    pub fn builtin(id: &str) -> Result<Self> {
        match id {
            "suggest10" => {
                let mut menu = MenuModel::parse(SUGGEST10)?;
                for o in &mut menu.options {
                    let doc = SUGGEST10_PREVIEWS
                        .iter()
                        .find(|(path, _)| *path == o.preview)
                        .map(|(_, doc)| *doc)
                        .ok_or_else(|| {
                            Error::InvalidMenu(format!("missing bundled preview {}", o.preview))
                        })?;
                    o.document = doc.to_string();
                }
                Ok(menu)
            }
            other => Err(Error::InvalidMenu(format!("unknown menu fixture {other:?}"))),
        }
    }

    /// Parses a fixture without resolving preview documents.
    pub fn parse(text: &str) -> Result<Self> {
        let file: MenuFile = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|span| text[..span.start].matches('\n').count() as u64 + 1)
                .unwrap_or(0);
            Error::parse(line, e.message().to_string())
        })?;
        MenuModel::new(file.id.unwrap_or_else(|| "menu".into()), file.options)
    }

    /// Loads a fixture file and reads every preview document next to it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut menu = MenuModel::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for o in &mut menu.options {
            let doc_path = base.join(&o.preview);
            o.document = std::fs::read_to_string(&doc_path).map_err(|e| {
                Error::InvalidMenu(format!("preview {} for {}: {e}", doc_path.display(), o.id))
            })?;
        }
        Ok(menu)
    }

    pub fn len(&self) -> usize {
        self.options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.options.is_empty()
    }

    pub fn options(&self) -> &[MenuOption] {
        &self.options
    }

    /// Option at a 1-based cursor.
    pub fn at(&self, cursor: usize) -> Option<&MenuOption> {
        cursor.checked_sub(1).and_then(|i| self.options.get(i))
    }
}
