//! Rule-based HTML cleaning.
//!
//! The page is walked in document order and cut into text blocks at
//! block-level element boundaries. Rules, in order of application:
//!
//! 1. `script`, `style`, `code` and other non-text elements are dropped.
//! 2. Whitespace runs inside text are collapsed to one space.
//! 3. Boilerplate containers (navigation bars, tables of contents, footers)
//!    are dropped.
//! 4. Adjacent sibling blocks with the same tag are joined when the first one
//!    does not end a sentence.
//! 5. Each remaining block gets a closing full stop if it lacks terminal
//!    punctuation, and stray spaces before punctuation are removed.
//! 6. Blocks are joined with single spaces into plain text.

use scraper::{ElementRef, Html, Node};

/// Elements whose content never reaches the reader as prose.
const NON_TEXT_TAGS: &[&str] = &[
    "script", "style", "code", "noscript", "template", "head", "title", "svg", "math", "iframe",
    "object", "embed", "canvas", "select", "button",
];

/// Elements that are navigation or page chrome in every layout.
const BOILERPLATE_TAGS: &[&str] = &["nav", "footer"];

const BOILERPLATE_ROLES: &[&str] = &["navigation", "menubar", "menu", "contentinfo"];

/// `id` or `class` tokens that mark tables of contents and navigation bars.
const BOILERPLATE_MARKERS: &[&str] = &[
    "toc",
    "navbar",
    "breadcrumb",
    "breadcrumbs",
    "skip-link",
    "skiplink",
    "mw-navigation",
];

const BLOCK_TAGS: &[&str] = &[
    "address",
    "article",
    "aside",
    "blockquote",
    "body",
    "caption",
    "center",
    "dd",
    "details",
    "dialog",
    "dir",
    "div",
    "dl",
    "dt",
    "fieldset",
    "figcaption",
    "figure",
    "form",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "header",
    "hgroup",
    "hr",
    "html",
    "legend",
    "li",
    "main",
    "menu",
    "ol",
    "p",
    "pre",
    "section",
    "summary",
    "table",
    "tbody",
    "td",
    "tfoot",
    "th",
    "thead",
    "tr",
    "ul",
];

const TERMINAL: &[char] = &['.', '!', '?', '…'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '”', '’', '»'];

/// Cleans an HTML document into plain text. Malformed markup is parsed
/// leniently; the worst case is the concatenation of all text nodes.
pub fn clean_html(html: &str) -> String {
    let doc = Html::parse_document(html);
    let mut c = Collector::default();
    c.walk(doc.root_element());
    c.flush();
    c.blocks
        .iter()
        .filter_map(|b| finish_block(b))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Default)]
struct Collector {
    blocks: Vec<String>,
    inline: String,
}

impl Collector {
    fn flush(&mut self) {
        if !self.inline.trim().is_empty() {
            self.blocks.push(std::mem::take(&mut self.inline));
        } else {
            self.inline.clear();
        }
    }

    fn walk(&mut self, el: ElementRef<'_>) {
        // (tag, number of blocks right after that sibling was emitted)
        let mut prev_block: Option<(&str, usize)> = None;
        for child in el.children() {
            match child.value() {
                Node::Text(t) => {
                    if !t.trim().is_empty() {
                        prev_block = None;
                    }
                    self.inline.push_str(t);
                }
                Node::Element(_) => {
                    let Some(child_el) = ElementRef::wrap(child) else {
                        continue;
                    };
                    if is_dropped(child_el) {
                        continue;
                    }
                    let name = child_el.value().name();
                    if name == "br" {
                        self.flush();
                        prev_block = None;
                    } else if BLOCK_TAGS.contains(&name) {
                        self.flush();
                        let before = self.blocks.len();
                        let join = matches!(prev_block, Some((tag, end))
                            if tag == name && end == before && before > 0
                                && !ends_sentence(&self.blocks[before - 1]));
                        self.walk(child_el);
                        self.flush();
                        if join && self.blocks.len() > before {
                            let first = self.blocks.remove(before);
                            let last = &mut self.blocks[before - 1];
                            last.push(' ');
                            last.push_str(&first);
                        }
                        if self.blocks.len() != before || join {
                            prev_block = Some((name, self.blocks.len()));
                        }
                    } else {
                        let blocks_before = self.blocks.len();
                        let inline_before = self.inline.len();
                        self.walk(child_el);
                        if self.blocks.len() != blocks_before
                            || !self.inline[inline_before.min(self.inline.len())..]
                                .trim()
                                .is_empty()
                        {
                            prev_block = None;
                        }
                    }
                }
                _ => {}
            }
        }
    }
}

fn is_dropped(el: ElementRef<'_>) -> bool {
    let e = el.value();
    let name = e.name();
    if NON_TEXT_TAGS.contains(&name) || BOILERPLATE_TAGS.contains(&name) {
        return true;
    }
    if e.attr("hidden").is_some() || e.attr("aria-hidden") == Some("true") {
        return true;
    }
    if let Some(role) = e.attr("role") {
        if BOILERPLATE_ROLES.contains(&role.trim().to_ascii_lowercase().as_str()) {
            return true;
        }
    }
    if let Some(id) = e.id() {
        if BOILERPLATE_MARKERS.contains(&id.to_ascii_lowercase().as_str()) {
            return true;
        }
    }
    e.classes()
        .any(|c| BOILERPLATE_MARKERS.contains(&c.to_ascii_lowercase().as_str()))
}

fn collapse_whitespace(s: &str) -> String {
    s.split(|c: char| c.is_whitespace())
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// True when the text, ignoring closing quotes and brackets, ends with
/// sentence-final punctuation.
pub fn ends_sentence(s: &str) -> bool {
    s.trim_end()
        .trim_end_matches(CLOSERS)
        .ends_with(TERMINAL)
}

fn finish_block(raw: &str) -> Option<String> {
    let text = collapse_whitespace(raw);
    if !text.chars().any(char::is_alphanumeric) {
        return None;
    }
    let mut text = fix_spacing(&text);
    if !ends_sentence(&text) {
        text.push('.');
    }
    Some(text)
}

/// Removes spaces before `. , ; : ! ?` and adds the missing space in
/// `word.Next` style joins.
pub fn fix_spacing(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out: Vec<char> = Vec::with_capacity(chars.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == ' ' {
            let next = chars.get(i + 1).copied();
            let prev = out.last().copied();
            let attaches = matches!(next, Some('.' | ',' | ';' | ':' | '!' | '?'))
                && prev.is_some_and(|p| p.is_alphanumeric() || CLOSERS.contains(&p))
                && !matches!(
                    (next, chars.get(i + 2)),
                    (Some('.'), Some(d)) if d.is_alphanumeric()
                );
            if attaches {
                i += 1;
                continue;
            }
        }
        out.push(c);
        if matches!(c, '.' | '!' | '?') && i >= 1 && chars[i - 1].is_lowercase() {
            if let (Some(a), Some(b)) = (chars.get(i + 1), chars.get(i + 2)) {
                if a.is_uppercase() && b.is_lowercase() {
                    out.push(' ');
                }
            }
        }
        i += 1;
    }
    out.into_iter().collect()
}
