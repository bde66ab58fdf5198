//! Network definitions: parsing the `.grn` text format, boolean update rules,
//! and synchronous transition maps.
//!
//! A file starts with `network <name>`, `p <prime>`, `genes <names...>`, then
//! either one `rule <gene> := <expr>` per gene (p = 2 only) or a `table`
//! section with one `<m> <image>` row per state. Optional `label` and
//! `ordering` lines attach annotations. `#` starts a comment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{checked_pow, Ordering};

/// Synchronous dynamics on `p^n` states: `images[m]` is the successor of the
/// canonically encoded state m.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionMap {
    pub p: u64,
    /// Number of genes N.
    pub n: usize,
    pub images: Vec<u64>,
}

impl TransitionMap {
    /// Validates sizes: `images` must hold `p^n` values below `p^n`, with p prime.
    pub fn new(p: u64, n: usize, images: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidOrdering(format!("p = {p} is not prime")));
        }
        let size = checked_pow(p, n)?;
        if images.len() as u64 != size {
            return Err(Error::WrongLength {
                expected: size as usize,
                got: images.len(),
            });
        }
        if let Some(&bad) = images.iter().find(|&&m| m >= size) {
            return Err(Error::ValueOutOfRange {
                value: bad,
                limit: size,
            });
        }
        Ok(TransitionMap { p, n, images })
    }

    pub fn size(&self) -> u64 {
        self.images.len() as u64
    }

    pub fn apply(&self, m: u64) -> u64 {
        self.images[m as usize]
    }

    pub fn is_fixed_point(&self, m: u64) -> bool {
        self.images[m as usize] == m
    }
}

/// Deterministic Miller-Rabin over the full u64 range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == small {
            return true;
        }
        if n % small == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Boolean update rule over gene states (nonzero = true).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BooleanExpression {
    Const(bool),
    /// Canonical gene index.
    Gene(usize),
    Not(Box<BooleanExpression>),
    And(Box<BooleanExpression>, Box<BooleanExpression>),
    Or(Box<BooleanExpression>, Box<BooleanExpression>),
}

impl BooleanExpression {
    pub fn eval(&self, states: &[u64]) -> bool {
        match self {
            BooleanExpression::Const(b) => *b,
            BooleanExpression::Gene(g) => states[*g] != 0,
            BooleanExpression::Not(e) => !e.eval(states),
            BooleanExpression::And(a, b) => a.eval(states) && b.eval(states),
            BooleanExpression::Or(a, b) => a.eval(states) || b.eval(states),
        }
    }

    /// Renders with gene names, parenthesizing only where precedence requires.
    pub fn display(&self, names: &[String]) -> String {
        fn go(e: &BooleanExpression, names: &[String], parent: u8) -> String {
            let (s, prec) = match e {
                BooleanExpression::Const(b) => ((*b as u8).to_string(), 3),
                BooleanExpression::Gene(g) => (names[*g].clone(), 3),
                BooleanExpression::Not(inner) => {
                    (format!("NOT {}", go(inner, names, 2)), 2)
                }
                BooleanExpression::And(a, b) => (
                    format!("{} AND {}", go(a, names, 1), go(b, names, 1)),
                    1,
                ),
                BooleanExpression::Or(a, b) => {
                    (format!("{} OR {}", go(a, names, 0), go(b, names, 0)), 0)
                }
            };
            if prec < parent {
                format!("({s})")
            } else {
                s
            }
        }
        go(self, names, 0)
    }
}

/// How the dynamics are specified in a network file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rules {
    /// One boolean rule per gene, canonical order (p = 2).
    Expressions(Vec<BooleanExpression>),
    /// Explicit images indexed by canonical encoding.
    Table(Vec<u64>),
}

/// A parsed network file: genes, dynamics, and optional annotations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkDefinition {
    pub name: String,
    pub p: u64,
    pub gene_names: Vec<String>,
    pub rules: Rules,
    /// Labels keyed by canonical encoding (`label` lines).
    pub labels: BTreeMap<u64, String>,
    /// Named gene orderings (`ordering` lines), most influential gene first.
    pub named_orderings: BTreeMap<String, Vec<String>>,
}

impl NetworkDefinition {
    pub fn num_genes(&self) -> usize {
        self.gene_names.len()
    }

    /// Resolves a named ordering from the file's annotations.
    pub fn ordering(&self, key: &str) -> Result<Ordering> {
        let names = self.named_orderings.get(key).ok_or_else(|| {
            Error::InvalidOrdering(format!(
                "network '{}' declares no ordering named '{key}'",
                self.name
            ))
        })?;
        Ordering::from_names(names, &self.gene_names)
    }
}

/// Evaluates the network definition into an explicit transition map.
/// Rule-based networks update all genes synchronously.
pub fn build_transition_map(net: &NetworkDefinition) -> Result<TransitionMap> {
    let n = net.num_genes();
    let size = checked_pow(net.p, n)?;
    let images = match &net.rules {
        Rules::Table(images) => images.clone(),
        Rules::Expressions(exprs) => {
            let mut images = Vec::with_capacity(size as usize);
            let mut states = vec![0u64; n];
            for m in 0..size {
                let mut rest = m;
                for s in states.iter_mut() {
                    *s = rest % net.p;
                    rest /= net.p;
                }
                let mut image = 0u64;
                for (g, expr) in exprs.iter().enumerate() {
                    if expr.eval(&states) {
                        image |= 1 << g;
                    }
                }
                images.push(image);
            }
            images
        }
    };
    TransitionMap::new(net.p, n, images)
}

/// Parses the `.grn` text format. Errors carry 1-based line and column.
pub fn parse_network(text: &str) -> Result<NetworkDefinition> {
    Parser::new(text).run()
}

/// Reads and parses a network file from disk.
pub fn parse_network_file(path: &Path) -> Result<NetworkDefinition> {
    let text = std::fs::read_to_string(path)?;
    parse_network(&text)
}

/// Datasets shipped with the library.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinDataset {
    /// Four-gene demonstration network (embedded).
    Toy4,
    /// Thirteen-gene A. thaliana floral network (loaded from the data
    /// directory; see [`dataset_path`]).
    Athaliana13,
}

const TOY4_TEXT: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/toy4.grn"));

/// Directories searched for on-disk datasets, in order: `$GRN_PADIC_DATA`,
/// `./data`, and the repository `data/` directory baked in at compile time.
pub fn dataset_search_dirs() -> Vec<PathBuf> {
    let mut dirs = Vec::new();
    if let Ok(dir) = std::env::var("GRN_PADIC_DATA") {
        dirs.push(PathBuf::from(dir));
    }
    dirs.push(PathBuf::from("data"));
    dirs.push(PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")));
    dirs
}

/// Locates a dataset file by name, e.g. `athaliana13.grn`.
pub fn dataset_path(file: &str) -> Result<PathBuf> {
    let dirs = dataset_search_dirs();
    for dir in &dirs {
        let candidate = dir.join(file);
        if candidate.is_file() {
            return Ok(candidate);
        }
    }
    Err(Error::DatasetMissing {
        name: file.to_string(),
        hint: format!(
            "searched {}; set GRN_PADIC_DATA to the directory holding it",
            dirs.iter()
                .map(|d| d.display().to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    })
}

/// Loads a shipped dataset.
pub fn builtin_dataset(which: BuiltinDataset) -> Result<NetworkDefinition> {
    match which {
        BuiltinDataset::Toy4 => parse_network(TOY4_TEXT),
        BuiltinDataset::Athaliana13 => parse_network_file(&dataset_path("athaliana13.grn")?),
    }
}

// ---------------------------------------------------------------------------
// Parsing internals
// ---------------------------------------------------------------------------

struct Parser<'a> {
    lines: Vec<(usize, &'a str)>, // (1-based line number, content with comment stripped)
    next: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, raw)| {
                let content = match raw.find('#') {
                    Some(pos) => &raw[..pos],
                    None => raw,
                };
                (i + 1, content)
            })
            .filter(|(_, content)| !content.trim().is_empty())
            .collect();
        Parser { lines, next: 0 }
    }

    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        let item = self.lines.get(self.next).copied();
        if item.is_some() {
            self.next += 1;
        }
        item
    }

    fn peek_line(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.next).copied()
    }

    fn run(mut self) -> Result<NetworkDefinition> {
        let (name_line, name) = self.expect_directive("network")?;
        let name = name.trim();
        if name.is_empty() || name.split_whitespace().count() != 1 {
            return Err(err(name_line, 1, "expected `network <name>`"));
        }

        let (p_line, p_text) = self.expect_directive("p")?;
        let p: u64 = p_text
            .trim()
            .parse()
            .map_err(|_| err(p_line, 1, format!("`p {}` is not an integer", p_text.trim())))?;
        if !is_prime(p) {
            return Err(err(p_line, 1, format!("p = {p} is not prime")));
        }

        let (genes_line, genes_text) = self.expect_directive("genes")?;
        let gene_names: Vec<String> = genes_text.split_whitespace().map(String::from).collect();
        if gene_names.is_empty() {
            return Err(err(genes_line, 1, "`genes` needs at least one name"));
        }
        for (i, g) in gene_names.iter().enumerate() {
            if gene_names[..i].contains(g) {
                return Err(err(genes_line, 1, format!("gene '{g}' declared twice")));
            }
        }
        let n = gene_names.len();
        checked_pow(p, n)?;

        let mut labels = BTreeMap::new();
        let mut named_orderings = BTreeMap::new();
        let mut rules: Vec<Option<BooleanExpression>> = vec![None; n];
        let mut saw_rule = false;

        while let Some((line_no, line)) = self.next_line() {
            let keyword = first_word(line).to_ascii_lowercase();
            let rest = rest_after_first_word(line);
            match keyword.as_str() {
                "label" => {
                    let (m, text) = parse_label(line_no, rest, p, n)?;
                    labels.insert(m, text);
                }
                "ordering" => {
                    let mut words = rest.split_whitespace();
                    let key = words
                        .next()
                        .ok_or_else(|| err(line_no, 1, "expected `ordering <key> <genes...>`"))?
                        .to_string();
                    let listed: Vec<String> = words.map(String::from).collect();
                    Ordering::from_names(&listed, &gene_names).map_err(|e| {
                        err(line_no, 1, format!("ordering '{key}': {e}"))
                    })?;
                    named_orderings.insert(key, listed);
                }
                "rule" => {
                    if p != 2 {
                        return Err(err(line_no, 1, "boolean rules require p = 2"));
                    }
                    saw_rule = true;
                    let (gene, expr) = parse_rule(line_no, line, &gene_names)?;
                    if rules[gene].is_some() {
                        return Err(err(
                            line_no,
                            1,
                            format!("gene '{}' has two rules", gene_names[gene]),
                        ));
                    }
                    rules[gene] = Some(expr);
                }
                "table" => {
                    if saw_rule {
                        return Err(err(line_no, 1, "cannot mix `rule` lines with a `table`"));
                    }
                    let images = self.parse_table(p, n)?;
                    return Ok(NetworkDefinition {
                        name: name.to_string(),
                        p,
                        gene_names,
                        rules: Rules::Table(images),
                        labels,
                        named_orderings,
                    });
                }
                other => {
                    return Err(err(
                        line_no,
                        1,
                        format!("unexpected directive '{other}' (expected rule, table, label, or ordering)"),
                    ));
                }
            }
        }

        let mut exprs = Vec::with_capacity(n);
        for (g, rule) in rules.into_iter().enumerate() {
            match rule {
                Some(e) => exprs.push(e),
                None => {
                    let last = self.lines.last().map(|(l, _)| *l).unwrap_or(1);
                    return Err(err(
                        last,
                        1,
                        format!("gene '{}' has no rule and no table is given", gene_names[g]),
                    ));
                }
            }
        }
        Ok(NetworkDefinition {
            name: name.to_string(),
            p,
            gene_names,
            rules: Rules::Expressions(exprs),
            labels,
            named_orderings,
        })
    }

    fn expect_directive(&mut self, keyword: &str) -> Result<(usize, &'a str)> {
        match self.next_line() {
            Some((line_no, line)) => {
                if first_word(line).eq_ignore_ascii_case(keyword) {
                    Ok((line_no, rest_after_first_word(line)))
                } else {
                    Err(err(
                        line_no,
                        1,
                        format!("expected `{keyword} ...`, found `{}`", line.trim()),
                    ))
                }
            }
            None => {
                let last = self.lines.last().map(|(l, _)| *l).unwrap_or(1);
                Err(err(last, 1, format!("missing `{keyword}` line")))
            }
        }
    }

    fn parse_table(&mut self, p: u64, n: usize) -> Result<Vec<u64>> {
        let size = checked_pow(p, n)? as usize;
        let mut images: Vec<Option<u64>> = vec![None; size];
        let mut rows = 0usize;
        while let Some((line_no, line)) = self.peek_line() {
            let mut words = line.split_whitespace();
            let m_text = words.next().unwrap_or("");
            if !m_text.chars().all(|c| c.is_ascii_digit()) {
                break; // next directive, handled by caller
            }
            self.next_line();
            let m: u64 = m_text
                .parse()
                .map_err(|_| err(line_no, 1, "table row must be `<state> <image>`"))?;
            let image: u64 = words
                .next()
                .ok_or_else(|| err(line_no, 1, "table row must be `<state> <image>`"))?
                .parse()
                .map_err(|_| err(line_no, 1, "table row must be `<state> <image>`"))?;
            if words.next().is_some() {
                return Err(err(line_no, 1, "table row has trailing tokens"));
            }
            if m as usize >= size || image as usize >= size {
                return Err(err(
                    line_no,
                    1,
                    format!("table row {m} -> {image} exceeds p^N - 1 = {}", size - 1),
                ));
            }
            if images[m as usize].is_some() {
                return Err(err(line_no, 1, format!("state {m} appears twice in table")));
            }
            images[m as usize] = Some(image);
            rows += 1;
        }
        if rows != size {
            let last = self.lines.last().map(|(l, _)| *l).unwrap_or(1);
            return Err(err(
                last,
                1,
                format!("table has {rows} rows, expected p^N = {size}"),
            ));
        }
        Ok(images.into_iter().map(Option::unwrap).collect())
    }
}

fn first_word(line: &str) -> &str {
    line.split_whitespace().next().unwrap_or("")
}

fn rest_after_first_word(line: &str) -> &str {
    let trimmed = line.trim_start();
    match trimmed.find(char::is_whitespace) {
        Some(pos) => trimmed[pos..].trim_start(),
        None => "",
    }
}

/// `label <digits> <text...>`: digits give per-gene states in canonical order
/// (compact for p <= 10, dot-separated otherwise).
fn parse_label(line_no: usize, rest: &str, p: u64, n: usize) -> Result<(u64, String)> {
    let mut words = rest.splitn(2, char::is_whitespace);
    let digits = words
        .next()
        .filter(|d| !d.is_empty())
        .ok_or_else(|| err(line_no, 1, "expected `label <digits> <text>`"))?;
    let text = words.next().unwrap_or("").trim().to_string();
    if text.is_empty() {
        return Err(err(line_no, 1, "label text is empty"));
    }
    let states: Vec<u64> = if p <= 10 {
        digits
            .chars()
            .map(|c| c.to_digit(10).map(u64::from).ok_or(c))
            .collect::<std::result::Result<_, _>>()
            .map_err(|c| err(line_no, 1, format!("bad digit '{c}' in label")))?
    } else {
        digits
            .split('.')
            .map(|w| w.parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(line_no, 1, "bad state list in label"))?
    };
    if states.len() != n {
        return Err(err(
            line_no,
            1,
            format!("label digits cover {} genes, network has {n}", states.len()),
        ));
    }
    let mut m = 0u64;
    let mut weight = 1u64;
    for (g, &s) in states.iter().enumerate() {
        if s >= p {
            return Err(err(line_no, 1, format!("label state {s} exceeds p - 1")));
        }
        m += s * weight;
        if g + 1 < n {
            weight *= p;
        }
    }
    Ok((m, text))
}

fn parse_rule(
    line_no: usize,
    line: &str,
    gene_names: &[String],
) -> Result<(usize, BooleanExpression)> {
    let assign = line.find(":=").ok_or_else(|| {
        err(line_no, 1, "expected `rule <gene> := <expression>`")
    })?;
    let head = line[..assign].trim();
    let mut head_words = head.split_whitespace();
    head_words.next(); // "rule"
    let gene_name = head_words
        .next()
        .ok_or_else(|| err(line_no, 1, "expected `rule <gene> := <expression>`"))?;
    if head_words.next().is_some() {
        return Err(err(line_no, 1, "expected `rule <gene> := <expression>`"));
    }
    let gene = gene_names
        .iter()
        .position(|g| g == gene_name)
        .ok_or_else(|| err(line_no, 1, format!("unknown gene '{gene_name}'")))?;
    let expr_text = &line[assign + 2..];
    let expr = parse_expression(expr_text, line_no, assign + 3, gene_names)?;
    Ok((gene, expr))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Not,
    And,
    Or,
    LParen,
    RParen,
}

/// Parses a boolean expression. `col_base` is the 1-based column of the
/// expression's first character in the original line.
pub fn parse_expression(
    text: &str,
    line: usize,
    col_base: usize,
    gene_names: &[String],
) -> Result<BooleanExpression> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = col_base + i;
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                tokens.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                tokens.push((Tok::RParen, col));
                i += 1;
            }
            '!' => {
                tokens.push((Tok::Not, col));
                i += 1;
            }
            '&' => {
                tokens.push((Tok::And, col));
                i += 1;
            }
            '|' => {
                tokens.push((Tok::Or, col));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let value: u64 = text[start..i]
                    .parse()
                    .map_err(|_| err(line, col, "bad integer"))?;
                tokens.push((Tok::Int(value), col));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() {
                    let c = bytes[i] as char;
                    if c.is_ascii_alphanumeric() || c == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let word = &text[start..i];
                let tok = match word.to_ascii_lowercase().as_str() {
                    "not" => Tok::Not,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    _ => Tok::Ident(word.to_string()),
                };
                tokens.push((tok, col));
            }
            other => return Err(err(line, col, format!("unexpected character '{other}'"))),
        }
    }
    let end_col = col_base + text.len();
    let mut parser = ExprParser {
        tokens,
        pos: 0,
        line,
        end_col,
        gene_names,
    };
    let expr = parser.or_expr()?;
    if parser.pos < parser.tokens.len() {
        let (tok, col) = &parser.tokens[parser.pos];
        return Err(err(line, *col, format!("unexpected token {tok:?}")));
    }
    Ok(expr)
}

struct ExprParser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
    gene_names: &'a [String],
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn advance(&mut self) -> Option<(Tok, usize)> {
        let item = self.tokens.get(self.pos).cloned();
        if item.is_some() {
            self.pos += 1;
        }
        item
    }

    fn or_expr(&mut self) -> Result<BooleanExpression> {
        let mut acc = self.and_expr()?;
        while matches!(self.peek(), Some(Tok::Or)) {
            self.advance();
            let rhs = self.and_expr()?;
            acc = BooleanExpression::Or(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn and_expr(&mut self) -> Result<BooleanExpression> {
        let mut acc = self.not_expr()?;
        while matches!(self.peek(), Some(Tok::And)) {
            self.advance();
            let rhs = self.not_expr()?;
            acc = BooleanExpression::And(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn not_expr(&mut self) -> Result<BooleanExpression> {
        if matches!(self.peek(), Some(Tok::Not)) {
            self.advance();
            let inner = self.not_expr()?;
            return Ok(BooleanExpression::Not(Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<BooleanExpression> {
        match self.advance() {
            Some((Tok::LParen, col)) => {
                let inner = self.or_expr()?;
                match self.advance() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    _ => Err(err(self.line, col, "unclosed parenthesis")),
                }
            }
            Some((Tok::Int(0), _)) => Ok(BooleanExpression::Const(false)),
            Some((Tok::Int(1), _)) => Ok(BooleanExpression::Const(true)),
            Some((Tok::Int(v), col)) => Err(err(
                self.line,
                col,
                format!("constant must be 0 or 1, found {v}"),
            )),
            Some((Tok::Ident(name), col)) => {
                let gene = self
                    .gene_names
                    .iter()
                    .position(|g| *g == name)
                    .ok_or_else(|| err(self.line, col, format!("unknown gene '{name}'")))?;
                Ok(BooleanExpression::Gene(gene))
            }
            Some((tok, col)) => Err(err(
                self.line,
                col,
                format!("expected a gene, constant, or '(' — found {tok:?}"),
            )),
            None => Err(err(self.line, self.end_col, "expression ended early")),
        }
    }
}
