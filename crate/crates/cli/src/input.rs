//! The block-structured input format.
//!
//! ```text
//! format = 1
//! chart { coords = [x1, x2, y1, y2]  leaf = [y1, y2] }
//! structure "L" {
//!   kind = poisson
//!   component (x1, x2) = 1
//!   component (y1, y2) = 1 + y1^2
//! }
//! submanifold "N" { zero = [y1, y2] }
//! metric { entry (x1, x1) = 1 }
//! samples { count = 16 seed = 42 box = 1 denom = 1024 tol = 1e-9 }
//! ```
//!
//! `structure` kinds: `frame` (lines `section = (vector exprs | form exprs)`),
//! `poisson` / `presymplectic` (lines `component (a, b) = expr`), and
//! `geometric_data` (lines `A (leaf, transverse) = expr`,
//! `sigma (transverse, transverse) = expr`, `pi (leaf, leaf) = expr`).
//! Expressions follow the library grammar and run to the end of the line;
//! `#` starts a comment.

use courant::cartan::{DiffForm, FrameSplit, MultiVector, OneForm, VectorField};
use courant::chart::Chart;
use courant::coupling::GeometricData;
use courant::courant::{DiracFrame, Section};
use courant::expr::{parse_expr, Expr, SampleConfig};
use courant::scalar::Scalar;
use courant::submanifold::{Metric, Submanifold};

#[derive(Debug)]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

impl std::error::Error for ParseError {}

type Result<T> = std::result::Result<T, ParseError>;

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(ParseError {
        line,
        msg: msg.into(),
    })
}

#[derive(Debug, Clone)]
pub enum StructureKind {
    Frame(Vec<(Vec<Expr>, Vec<Expr>)>),
    Poisson(MultiVector),
    Presymplectic(DiffForm),
    Data(GeometricData),
}

#[derive(Debug, Clone)]
pub struct StructureBlock {
    pub name: String,
    pub kind: StructureKind,
}

impl StructureBlock {
    /// The frame presentation of the structure.
    pub fn frame(&self, chart: &Chart) -> std::result::Result<DiracFrame, courant::Error> {
        match &self.kind {
            StructureKind::Frame(rows) => {
                let sections = rows
                    .iter()
                    .map(|(v, f)| {
                        Section::new(
                            VectorField::new(chart, v.clone())?,
                            OneForm::new(chart, f.clone())?,
                        )
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                DiracFrame::from_sections(chart, sections)
            }
            StructureKind::Poisson(p) => DiracFrame::graph_of_poisson(p),
            StructureKind::Presymplectic(tau) => DiracFrame::graph_of_presymplectic(tau),
            StructureKind::Data(data) => courant::coupling::reconstruct(data),
        }
    }

    pub fn geometric_data(&self) -> Option<&GeometricData> {
        match &self.kind {
            StructureKind::Data(data) => Some(data),
            _ => None,
        }
    }
}

#[derive(Debug)]
pub struct Document {
    pub chart: Chart,
    pub structure: Option<StructureBlock>,
    pub submanifold: Option<(String, Submanifold)>,
    pub metric: Option<Metric>,
    pub samples: SampleConfig,
}

impl Document {
    /// Whether any expression in the document has a transcendental node.
    pub fn has_transcendental(&self) -> bool {
        let exprs: Vec<&Expr> = match &self.structure {
            Some(block) => match &block.kind {
                StructureKind::Frame(rows) => rows
                    .iter()
                    .flat_map(|(v, f)| v.iter().chain(f.iter()))
                    .collect(),
                StructureKind::Poisson(p) => p.terms().map(|(_, c)| c).collect(),
                StructureKind::Presymplectic(t) => t.terms().map(|(_, c)| c).collect(),
                StructureKind::Data(d) => d
                    .sigma
                    .terms()
                    .map(|(_, c)| c)
                    .chain(d.pi.terms().map(|(_, c)| c))
                    .chain(d.split.coefficients().iter().flatten())
                    .collect(),
            },
            None => Vec::new(),
        };
        exprs.into_iter().any(Expr::has_transcendental)
    }
}

// raw block structure before expression resolution
struct RawBlock {
    keyword: String,
    name: Option<String>,
    entries: Vec<RawEntry>,
    line: usize,
}

struct RawEntry {
    key: String,
    // arguments in parentheses between the key and `=`, if any
    args: Vec<String>,
    value: String,
    line: usize,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0, line: 1 }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn skip_spaces_inline(&mut self) {
        while let Some(c) = self.peek() {
            if c == ' ' || c == '\t' || c == '\r' {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_trivia();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.bump();
            } else {
                break;
            }
        }
        if start == self.pos {
            return err(self.line, "expected an identifier");
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_trivia();
        match self.peek() {
            Some(found) if found == c => {
                self.bump();
                Ok(())
            }
            Some(found) => err(self.line, format!("expected `{c}`, found `{found}`")),
            None => err(self.line, format!("expected `{c}`, found end of input")),
        }
    }

    // value text up to end of line (comments stripped)
    fn rest_of_line(&mut self) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c == '\n' || c == '#' {
                break;
            }
            out.push(c);
            self.bump();
        }
        out.trim().to_string()
    }

    // value text up to end of line or closing brace (for one-line blocks):
    // used for bracket lists and scalar settings
    fn compact_value(&mut self) -> Result<String> {
        self.skip_spaces_inline();
        let mut out = String::new();
        if self.peek() == Some('[') {
            // a bracket list may contain spaces; read through `]`
            loop {
                match self.bump() {
                    Some(c) => {
                        out.push(c);
                        if c == ']' {
                            break;
                        }
                        if c == '\n' {
                            return err(self.line, "unterminated `[ ... ]` list");
                        }
                    }
                    None => return err(self.line, "unterminated `[ ... ]` list"),
                }
            }
            return Ok(out.trim().to_string());
        }
        // plain token (number, ident)
        while let Some(c) = self.peek() {
            if c.is_whitespace() || c == '}' || c == '#' {
                break;
            }
            out.push(c);
            self.bump();
        }
        if out.is_empty() {
            return err(self.line, "expected a value");
        }
        Ok(out)
    }
}

fn parse_raw(src: &str) -> Result<(Option<(String, usize)>, Vec<RawBlock>)> {
    let mut cur = Cursor::new(src);
    let mut format = None;
    let mut blocks = Vec::new();
    loop {
        cur.skip_trivia();
        if cur.peek().is_none() {
            break;
        }
        let line = cur.line;
        let keyword = cur.ident()?;
        if keyword == "format" {
            cur.expect('=')?;
            cur.skip_spaces_inline();
            let value = cur.compact_value()?;
            format = Some((value, line));
            continue;
        }
        // optional quoted name
        cur.skip_trivia();
        let name = if cur.peek() == Some('"') {
            cur.bump();
            let mut out = String::new();
            loop {
                match cur.bump() {
                    Some('"') => break,
                    Some(c) => out.push(c),
                    None => return err(cur.line, "unterminated string"),
                }
            }
            Some(out)
        } else {
            None
        };
        cur.expect('{')?;
        let mut entries = Vec::new();
        loop {
            cur.skip_trivia();
            if cur.peek() == Some('}') {
                cur.bump();
                break;
            }
            if cur.peek().is_none() {
                return err(cur.line, format!("unterminated `{keyword}` block"));
            }
            let entry_line = cur.line;
            let key = cur.ident()?;
            // optional parenthesized arguments
            cur.skip_spaces_inline();
            let mut args = Vec::new();
            if cur.peek() == Some('(') {
                cur.bump();
                let mut current = String::new();
                loop {
                    match cur.bump() {
                        Some(')') => {
                            if !current.trim().is_empty() {
                                args.push(current.trim().to_string());
                            }
                            break;
                        }
                        Some(',') => {
                            args.push(current.trim().to_string());
                            current = String::new();
                        }
                        Some(c) => current.push(c),
                        None => return err(cur.line, "unterminated argument list"),
                    }
                }
            }
            cur.expect('=')?;
            cur.skip_spaces_inline();
            // section and component values may contain spaces: for keys with
            // free-form expression values take the rest of the line; for
            // known list/scalar settings take a compact value so one-line
            // blocks parse
            let value = match key.as_str() {
                "coords" | "leaf" | "zero" | "kind" | "count" | "seed" | "box" | "denom"
                | "tol" => cur.compact_value()?,
                _ => cur.rest_of_line(),
            };
            entries.push(RawEntry {
                key,
                args,
                value,
                line: entry_line,
            });
        }
        blocks.push(RawBlock {
            keyword,
            name,
            entries,
            line,
        });
    }
    Ok((format, blocks))
}

fn parse_name_list(value: &str, line: usize) -> Result<Vec<String>> {
    let trimmed = value.trim();
    if !trimmed.starts_with('[') || !trimmed.ends_with(']') {
        return err(line, "expected a `[name, name, ...]` list");
    }
    let inner = &trimmed[1..trimmed.len() - 1];
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    Ok(inner.split(',').map(|s| s.trim().to_string()).collect())
}

fn parse_expr_value(value: &str, chart: &Chart, line: usize) -> Result<Expr> {
    parse_expr(value, chart).map_err(|e| ParseError {
        line,
        msg: format!("in expression `{value}`: {e}"),
    })
}

/// Split a `(a, b | c, d)` section value on top-level commas and the bar.
fn split_section(value: &str, line: usize) -> Result<(Vec<String>, Vec<String>)> {
    let trimmed = value.trim();
    if !trimmed.starts_with('(') || !trimmed.ends_with(')') {
        return err(line, "expected `section = (vector exprs | form exprs)`");
    }
    let inner = &trimmed[1..trimmed.len() - 1];
    let mut depth = 0usize;
    let mut groups: Vec<Vec<String>> = vec![Vec::new()];
    let mut current = String::new();
    for c in inner.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            ',' if depth == 0 => {
                groups.last_mut().unwrap().push(current.trim().to_string());
                current = String::new();
            }
            '|' if depth == 0 => {
                groups.last_mut().unwrap().push(current.trim().to_string());
                current = String::new();
                groups.push(Vec::new());
            }
            _ => current.push(c),
        }
    }
    groups.last_mut().unwrap().push(current.trim().to_string());
    if groups.len() != 2 {
        return err(line, "a section needs exactly one `|` separator");
    }
    Ok((groups[0].clone(), groups[1].clone()))
}

fn parse_scalar_setting(value: &str, line: usize) -> Result<Scalar> {
    let parts: Vec<&str> = value.split('/').collect();
    let parse_int = |s: &str| -> Result<i64> {
        s.trim()
            .parse::<i64>()
            .map_err(|_| ParseError {
                line,
                msg: format!("expected an integer, found `{s}`"),
            })
    };
    match parts.as_slice() {
        [n] => Ok(Scalar::from_int(parse_int(n)?)),
        [n, d] => {
            let d = parse_int(d)?;
            if d == 0 {
                return err(line, "zero denominator");
            }
            Ok(Scalar::ratio(parse_int(n)?, d))
        }
        _ => err(line, format!("expected a rational, found `{value}`")),
    }
}

pub fn parse_document(src: &str) -> Result<Document> {
    let (format, blocks) = parse_raw(src)?;
    match format {
        Some((value, line)) => {
            if value.trim() != "1" {
                return err(line, format!("unsupported format `{value}`"));
            }
        }
        None => return err(1, "missing `format = 1` header"),
    }
    // chart first
    let chart_block = blocks
        .iter()
        .find(|b| b.keyword == "chart")
        .ok_or_else(|| ParseError {
            line: 1,
            msg: "missing `chart { ... }` block".into(),
        })?;
    let mut coords = None;
    let mut leaf = Vec::new();
    for entry in &chart_block.entries {
        match entry.key.as_str() {
            "coords" => coords = Some(parse_name_list(&entry.value, entry.line)?),
            "leaf" => leaf = parse_name_list(&entry.value, entry.line)?,
            other => return err(entry.line, format!("unknown chart setting `{other}`")),
        }
    }
    let coords = coords.ok_or_else(|| ParseError {
        line: chart_block.line,
        msg: "chart needs `coords = [...]`".into(),
    })?;
    let leaf_refs: Vec<&str> = leaf.iter().map(String::as_str).collect();
    let chart = Chart::adapted(coords, &leaf_refs).map_err(|e| ParseError {
        line: chart_block.line,
        msg: e.to_string(),
    })?;

    let mut structure = None;
    let mut submanifold = None;
    let mut metric = None;
    let mut samples = SampleConfig::default();
    for block in &blocks {
        match block.keyword.as_str() {
            "chart" => {}
            "structure" => {
                if structure.is_some() {
                    return err(block.line, "only one structure block is supported");
                }
                structure = Some(parse_structure(block, &chart)?);
            }
            "submanifold" => {
                let mut zero = None;
                for entry in &block.entries {
                    match entry.key.as_str() {
                        "zero" => zero = Some(parse_name_list(&entry.value, entry.line)?),
                        other => {
                            return err(entry.line, format!("unknown submanifold setting `{other}`"))
                        }
                    }
                }
                let zero = zero.ok_or_else(|| ParseError {
                    line: block.line,
                    msg: "submanifold needs `zero = [...]`".into(),
                })?;
                let zero_refs: Vec<&str> = zero.iter().map(String::as_str).collect();
                let sub = Submanifold::new(&chart, &zero_refs).map_err(|e| ParseError {
                    line: block.line,
                    msg: e.to_string(),
                })?;
                submanifold = Some((block.name.clone().unwrap_or_else(|| "N".into()), sub));
            }
            "metric" => {
                let dim = chart.dim();
                let mut entries = vec![vec![Expr::zero(); dim]; dim];
                for entry in &block.entries {
                    if entry.key != "entry" && entry.key != "g" {
                        return err(entry.line, format!("unknown metric setting `{}`", entry.key));
                    }
                    if entry.args.len() != 2 {
                        return err(entry.line, "metric entries take two coordinates");
                    }
                    let i = coord_index(&chart, &entry.args[0], entry.line)?;
                    let j = coord_index(&chart, &entry.args[1], entry.line)?;
                    let value = parse_expr_value(&entry.value, &chart, entry.line)?;
                    entries[i][j] = value.clone();
                    if i != j {
                        entries[j][i] = value;
                    }
                }
                metric = Some(Metric::new(&chart, entries).map_err(|e| ParseError {
                    line: block.line,
                    msg: e.to_string(),
                })?);
            }
            "samples" => {
                for entry in &block.entries {
                    let line = entry.line;
                    match entry.key.as_str() {
                        "count" => {
                            samples.count = entry.value.parse().map_err(|_| ParseError {
                                line,
                                msg: "count must be a positive integer".into(),
                            })?
                        }
                        "seed" => {
                            samples.seed = entry
                                .value
                                .parse::<i64>()
                                .map_err(|_| ParseError {
                                    line,
                                    msg: "seed must be a 64-bit integer".into(),
                                })? as u64
                        }
                        "box" => samples.box_radius = parse_scalar_setting(&entry.value, line)?,
                        "denom" => {
                            samples.denom_bound = entry.value.parse().map_err(|_| ParseError {
                                line,
                                msg: "denom must be a positive integer".into(),
                            })?
                        }
                        "tol" => {
                            samples.tol = entry.value.parse().map_err(|_| ParseError {
                                line,
                                msg: "tol must be a floating-point number".into(),
                            })?
                        }
                        other => return err(line, format!("unknown samples setting `{other}`")),
                    }
                }
                if samples.count == 0 || samples.denom_bound == 0 || samples.tol <= 0.0 {
                    return err(block.line, "samples settings must be positive");
                }
            }
            other => return err(block.line, format!("unknown block `{other}`")),
        }
    }
    Ok(Document {
        chart,
        structure,
        submanifold,
        metric,
        samples,
    })
}

fn coord_index(chart: &Chart, name: &str, line: usize) -> Result<usize> {
    chart.index_of(name).ok_or_else(|| ParseError {
        line,
        msg: format!("`{name}` is not a chart coordinate"),
    })
}

fn parse_structure(block: &RawBlock, chart: &Chart) -> Result<StructureBlock> {
    let name = block.name.clone().unwrap_or_else(|| "L".into());
    let kind_entry = block
        .entries
        .iter()
        .find(|e| e.key == "kind")
        .ok_or_else(|| ParseError {
            line: block.line,
            msg: "structure needs `kind = frame|poisson|presymplectic|geometric_data`".into(),
        })?;
    let kind = match kind_entry.value.trim() {
        "frame" => {
            let mut rows = Vec::new();
            for entry in &block.entries {
                if entry.key != "section" {
                    if entry.key != "kind" {
                        return err(entry.line, format!("unknown frame setting `{}`", entry.key));
                    }
                    continue;
                }
                let (vector_texts, form_texts) = split_section(&entry.value, entry.line)?;
                if vector_texts.len() != chart.dim() || form_texts.len() != chart.dim() {
                    return err(
                        entry.line,
                        format!(
                            "a section needs {} vector and {} form components",
                            chart.dim(),
                            chart.dim()
                        ),
                    );
                }
                let vector = vector_texts
                    .iter()
                    .map(|t| parse_expr_value(t, chart, entry.line))
                    .collect::<Result<Vec<_>>>()?;
                let form = form_texts
                    .iter()
                    .map(|t| parse_expr_value(t, chart, entry.line))
                    .collect::<Result<Vec<_>>>()?;
                rows.push((vector, form));
            }
            if rows.len() != chart.dim() {
                return err(
                    block.line,
                    format!("a frame needs {} sections, found {}", chart.dim(), rows.len()),
                );
            }
            StructureKind::Frame(rows)
        }
        "poisson" | "presymplectic" => {
            let mut components = Vec::new();
            for entry in &block.entries {
                if entry.key == "kind" {
                    continue;
                }
                if entry.key != "component" {
                    return err(entry.line, format!("unknown setting `{}`", entry.key));
                }
                if entry.args.len() != 2 {
                    return err(entry.line, "components take two coordinates");
                }
                let i = coord_index(chart, &entry.args[0], entry.line)?;
                let j = coord_index(chart, &entry.args[1], entry.line)?;
                if i == j {
                    return err(entry.line, "component indices must differ");
                }
                let value = parse_expr_value(&entry.value, chart, entry.line)?;
                components.push((i, j, value));
            }
            if kind_entry.value.trim() == "poisson" {
                let mut p = MultiVector::zero(chart, 2).map_err(|e| ParseError {
                    line: block.line,
                    msg: e.to_string(),
                })?;
                for (i, j, value) in components {
                    p.add_term(&[i, j], value);
                }
                StructureKind::Poisson(p)
            } else {
                let mut tau = DiffForm::zero(chart, 2).map_err(|e| ParseError {
                    line: block.line,
                    msg: e.to_string(),
                })?;
                for (i, j, value) in components {
                    tau.add_term(&[i, j], value);
                }
                StructureKind::Presymplectic(tau)
            }
        }
        "geometric_data" => {
            let p_dim = chart.leaf_dim();
            let q = chart.transverse_dim();
            let leaves = chart.leaf_indices();
            let trans = chart.transverse_indices();
            let mut a = vec![vec![Expr::zero(); q]; p_dim];
            let mut sigma = DiffForm::zero(chart, 2).map_err(|e| ParseError {
                line: block.line,
                msg: e.to_string(),
            })?;
            let mut pi = MultiVector::zero(chart, 2).map_err(|e| ParseError {
                line: block.line,
                msg: e.to_string(),
            })?;
            for entry in &block.entries {
                if entry.key == "kind" {
                    continue;
                }
                if entry.args.len() != 2 {
                    return err(entry.line, "data entries take two coordinates");
                }
                let i = coord_index(chart, &entry.args[0], entry.line)?;
                let j = coord_index(chart, &entry.args[1], entry.line)?;
                let value = parse_expr_value(&entry.value, chart, entry.line)?;
                match entry.key.as_str() {
                    "A" | "a" => {
                        let ai = leaves.iter().position(|&l| l == i).ok_or(ParseError {
                            line: entry.line,
                            msg: format!("`{}` is not a leaf coordinate", entry.args[0]),
                        })?;
                        let ui = trans.iter().position(|&t| t == j).ok_or(ParseError {
                            line: entry.line,
                            msg: format!("`{}` is not a transverse coordinate", entry.args[1]),
                        })?;
                        a[ai][ui] = value;
                    }
                    "sigma" => sigma.add_term(&[i, j], value),
                    "pi" => pi.add_term(&[i, j], value),
                    other => return err(entry.line, format!("unknown data table `{other}`")),
                }
            }
            let split = FrameSplit::new(chart, a).map_err(|e| ParseError {
                line: block.line,
                msg: e.to_string(),
            })?;
            let data = GeometricData::new(split, sigma, pi).map_err(|e| ParseError {
                line: block.line,
                msg: e.to_string(),
            })?;
            StructureKind::Data(data)
        }
        other => {
            return err(
                kind_entry.line,
                format!("unknown structure kind `{other}`"),
            )
        }
    };
    Ok(StructureBlock { name, kind })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_poisson_document() {
        let src = r#"
format = 1
chart { coords = [x1, x2, y1, y2]  leaf = [y1, y2] }
structure "L" {
  kind = poisson
  component (x1, x2) = 1
  component (y1, y2) = 1 + y1^2   # leaf block
}
samples { count = 8 seed = 7 box = 1/2 denom = 64 tol = 1e-9 }
"#;
        let doc = parse_document(src).unwrap();
        assert_eq!(doc.chart.dim(), 4);
        assert_eq!(doc.samples.count, 8);
        assert_eq!(doc.samples.box_radius, Scalar::ratio(1, 2));
        let frame = doc.structure.unwrap().frame(&doc.chart).unwrap();
        assert_eq!(frame.sections().len(), 4);
    }

    #[test]
    fn rejects_undeclared_leaf_coordinate() {
        let src = "format = 1\nchart { coords = [x1] leaf = [z9] }\n";
        assert!(parse_document(src).is_err());
    }

    #[test]
    fn parses_frame_sections_with_nested_parens() {
        let src = r#"
format = 1
chart { coords = [x, y] }
structure "L" {
  kind = frame
  section = (0, sin(x) | 1, 0)
  section = (0, 0 | 0, 1)
}
"#;
        let doc = parse_document(src).unwrap();
        assert!(doc.has_transcendental());
    }

    #[test]
    fn parses_geometric_data() {
        let src = r#"
format = 1
chart { coords = [x1, x2, y1, y2]  leaf = [y1, y2] }
structure "L" {
  kind = geometric_data
  A (y1, x1) = 0
  sigma (x1, x2) = 1 + x1^2
  pi (y1, y2) = 1 + y1^2
}
"#;
        let doc = parse_document(src).unwrap();
        let block = doc.structure.unwrap();
        assert!(block.geometric_data().is_some());
    }

    #[test]
    fn missing_format_is_an_error() {
        assert!(parse_document("chart { coords = [x] }\n").is_err());
    }
}
