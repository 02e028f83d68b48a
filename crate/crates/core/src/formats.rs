//! Line-oriented text formats: DIMACS CNF, `.cres` proof graphs, `.sap`
//! Sherali-Adams proofs and bipartite edge lists.
//!
//! Every parser reports the 1-based line and column of the first problem.
//! Serializers emit the canonical form, so `parse(serialize(x)) == x`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_traits::Zero;
use thiserror::Error;

use crate::clause::{Clause, CnfFormula, Literal};
use crate::flow::FlowAssignment;
use crate::generators::BipartiteGraph;
use crate::graph::{FormulaId, ProofGraph, RuleKind};
use crate::lp::Rational;
use crate::sa::{Monomial, RefPolynomial, SaProof, SaTerm, Twin};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Token<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn parse<T: FromStr>(&self, what: &str) -> Result<T, ParseError> {
        self.text
            .parse()
            .map_err(|_| self.error(format!("expected {what}, found `{}`", self.text)))
    }
}

fn tokens(line: &str, number: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices().chain([(line.len(), ' ')]) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    line: number,
                    column: line[..s].chars().count() + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

/// Non-empty, non-comment lines split into tokens.
fn content_lines(text: &str) -> impl Iterator<Item = Vec<Token<'_>>> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let toks = tokens(line, i + 1);
        match toks.first() {
            None => None,
            Some(t) if t.text == "c" || t.text.starts_with('%') => None,
            Some(_) => Some(toks),
        }
    })
}

fn end_of_text(text: &str) -> ParseError {
    ParseError {
        line: text.lines().count().max(1),
        column: 1,
        message: "missing header".into(),
    }
}

fn expect_len(toks: &[Token<'_>], len: usize, form: &str) -> Result<(), ParseError> {
    if toks.len() == len {
        Ok(())
    } else {
        let at = toks.get(len).unwrap_or(&toks[toks.len() - 1]);
        Err(at.error(format!("expected `{form}`")))
    }
}

/// Exact rational in `num/den` or integer form.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let num = num_bigint::BigInt::from_str(num).map_err(|_| format!("bad numerator in `{text}`"))?;
    let den = num_bigint::BigInt::from_str(den).map_err(|_| format!("bad denominator in `{text}`"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in `{text}`"));
    }
    Ok(Rational::new(num, den))
}

fn rational_token(tok: &Token<'_>) -> Result<Rational, ParseError> {
    parse_rational(tok.text).map_err(|m| tok.error(m))
}

fn literal_token(tok: &Token<'_>, num_variables: Option<u32>) -> Result<Literal, ParseError> {
    let value: i64 = tok.parse("a literal")?;
    let lit = Literal::from_dimacs(value).map_err(|e| tok.error(e.to_string()))?;
    if let Some(n) = num_variables {
        if lit.var() > n {
            return Err(tok.error(format!("variable {} exceeds the declared {n}", lit.var())));
        }
    }
    Ok(lit)
}

/// Literals up to a terminating `0`, which must be the last token.
fn zero_terminated(toks: &[Token<'_>], num_variables: Option<u32>) -> Result<Clause, ParseError> {
    let Some((last, body)) = toks.split_last() else {
        return Err(ParseError {
            line: 0,
            column: 0,
            message: "empty literal list".into(),
        });
    };
    if last.text != "0" {
        return Err(last.error("literal list must end with 0"));
    }
    body.iter()
        .map(|t| {
            if t.text == "0" {
                Err(t.error("0 before the end of the line"))
            } else {
                literal_token(t, num_variables)
            }
        })
        .collect()
}

fn clause_line(clause: &Clause) -> String {
    let mut s = String::new();
    for v in clause.to_dimacs() {
        let _ = write!(s, "{v} ");
    }
    s.push('0');
    s
}

/// Goal syntax: `empty`, an empty string, or DIMACS literals ending
/// in `0`.
pub fn parse_goal(text: &str) -> Result<Clause, ParseError> {
    let toks = tokens(text, 1);
    if toks.is_empty() || (toks.len() == 1 && toks[0].text == "empty") {
        return Ok(Clause::empty());
    }
    zero_terminated(&toks, None)
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ParseError> {
    let mut lines = content_lines(text);
    let header = lines.next().ok_or_else(|| end_of_text(text))?;
    if header[0].text != "p" || header.get(1).map(|t| t.text) != Some("cnf") {
        return Err(header[0].error("expected `p cnf <vars> <clauses>`"));
    }
    expect_len(&header, 4, "p cnf <vars> <clauses>")?;
    let num_variables: u32 = header[2].parse("a variable count")?;
    let declared: usize = header[3].parse("a clause count")?;
    let mut clauses = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut last = header[3];
    for toks in lines {
        for tok in toks {
            last = tok;
            if tok.text == "0" {
                clauses.push(current.drain(..).collect::<Clause>());
                if clauses.len() > declared {
                    return Err(tok.error(format!("more than the declared {declared} clauses")));
                }
            } else {
                current.push(literal_token(&tok, Some(num_variables))?);
            }
        }
    }
    if !current.is_empty() {
        return Err(last.error("last clause is not terminated by 0"));
    }
    if clauses.len() != declared {
        return Err(last.error(format!(
            "header declares {declared} clauses but {} were given",
            clauses.len()
        )));
    }
    CnfFormula::new(num_variables, clauses).map_err(|e| header[2].error(e.to_string()))
}

pub fn write_dimacs(formula: &CnfFormula) -> String {
    let mut s = format!("p cnf {} {}\n", formula.num_variables(), formula.clauses().len());
    for c in formula.clauses() {
        s.push_str(&clause_line(c));
        s.push('\n');
    }
    s
}

fn id_token(tok: &Token<'_>, count: usize, what: &str) -> Result<usize, ParseError> {
    let id: usize = tok.parse(what)?;
    if id == 0 || id > count {
        return Err(tok.error(format!("{what} {id} outside 1..={count}")));
    }
    Ok(id - 1)
}

/// Parses a `.cres` file. The flow is present only when the file carries a
/// `w` line for every inference-vertex.
pub fn parse_cres(text: &str) -> Result<(ProofGraph, Option<FlowAssignment>), ParseError> {
    let mut lines = content_lines(text);
    let header = lines.next().ok_or_else(|| end_of_text(text))?;
    if header[0].text != "p" || header.get(1).map(|t| t.text) != Some("cres") {
        return Err(header[0].error("expected `p cres <formula-vertices> <inference-vertices>`"));
    }
    expect_len(&header, 4, "p cres <formula-vertices> <inference-vertices>")?;
    let nf: usize = header[2].parse("a vertex count")?;
    let ni: usize = header[3].parse("a vertex count")?;
    let mut formulas: Vec<Option<Clause>> = vec![None; nf];
    let mut inferences = vec![None; ni];
    let mut hyps = Vec::new();
    let mut goal = None;
    let mut flows: Vec<Option<Rational>> = vec![None; ni];
    let mut last = header[0];
    for toks in lines {
        last = toks[0];
        match toks[0].text {
            "f" => {
                if toks.len() < 3 {
                    return Err(toks[0].error("expected `f <id> <lit>... 0`"));
                }
                let id = id_token(&toks[1], nf, "formula-vertex")?;
                if formulas[id].is_some() {
                    return Err(toks[1].error("formula-vertex defined twice"));
                }
                formulas[id] = Some(zero_terminated(&toks[2..], None)?);
            }
            "i" => {
                if toks.len() < 4 {
                    return Err(toks[0].error("expected `i <id> <rule> <var> ...`"));
                }
                let id = id_token(&toks[1], ni, "inference-vertex")?;
                if inferences[id].is_some() {
                    return Err(toks[1].error("inference-vertex defined twice"));
                }
                let var: u32 = toks[3].parse("a variable")?;
                if var == 0 {
                    return Err(toks[3].error("variable 0"));
                }
                let f = |t: &Token<'_>| id_token(t, nf, "formula-vertex").map(FormulaId);
                let rule = match toks[2].text {
                    "ax" => {
                        expect_len(&toks, 5, "i <id> ax <var> <out>")?;
                        (RuleKind::Axiom(var), vec![], vec![f(&toks[4])?])
                    }
                    "cut" => {
                        expect_len(&toks, 7, "i <id> cut <var> <in1> <in2> <out>")?;
                        (
                            RuleKind::Cut(var),
                            vec![f(&toks[4])?, f(&toks[5])?],
                            vec![f(&toks[6])?],
                        )
                    }
                    "split" => {
                        if toks.len() != 6 && toks.len() != 7 {
                            return Err(toks[0].error("expected `i <id> split <var> <in> <out1> [<out2>]`"));
                        }
                        let outs = toks[5..].iter().map(f).collect::<Result<_, _>>()?;
                        (RuleKind::Split(var), vec![f(&toks[4])?], outs)
                    }
                    other => return Err(toks[2].error(format!("unknown rule `{other}`"))),
                };
                inferences[id] = Some(rule);
            }
            "h" => {
                expect_len(&toks, 2, "h <fid>")?;
                hyps.push(FormulaId(id_token(&toks[1], nf, "formula-vertex")?));
            }
            "g" => {
                expect_len(&toks, 2, "g <fid>")?;
                if goal.is_some() {
                    return Err(toks[0].error("second goal mark"));
                }
                goal = Some(FormulaId(id_token(&toks[1], nf, "formula-vertex")?));
            }
            "w" => {
                expect_len(&toks, 3, "w <iid> <num>/<den>")?;
                let id = id_token(&toks[1], ni, "inference-vertex")?;
                if flows[id].is_some() {
                    return Err(toks[1].error("flow given twice"));
                }
                flows[id] = Some(rational_token(&toks[2])?);
            }
            "p" => return Err(toks[0].error("second header")),
            other => return Err(toks[0].error(format!("unknown line type `{other}`"))),
        }
    }
    let mut graph = ProofGraph::new();
    for (i, c) in formulas.into_iter().enumerate() {
        let c = c.ok_or_else(|| last.error(format!("formula-vertex {} is never defined", i + 1)))?;
        graph.add_formula(c);
    }
    for (i, r) in inferences.into_iter().enumerate() {
        let (kind, ins, outs) =
            r.ok_or_else(|| last.error(format!("inference-vertex {} is never defined", i + 1)))?;
        graph.add_inference(kind, ins, outs);
    }
    for h in hyps {
        graph.mark_hypothesis(h);
    }
    graph.set_goal(goal);
    let given = flows.iter().filter(|f| f.is_some()).count();
    let flow = match given {
        0 => None,
        g if g == ni => Some(FlowAssignment::new(flows.into_iter().flatten().collect())),
        g => return Err(last.error(format!("flows given for {g} of {ni} inference-vertices"))),
    };
    Ok((graph, flow))
}

pub fn write_cres(graph: &ProofGraph, flow: Option<&FlowAssignment>) -> String {
    let mut s = format!("p cres {} {}\n", graph.num_formulas(), graph.num_inferences());
    for (i, c) in graph.formulas().iter().enumerate() {
        let _ = writeln!(s, "f {} {}", i + 1, clause_line(c));
    }
    for (i, w) in graph.inferences().iter().enumerate() {
        let _ = write!(s, "i {} {} {}", i + 1, w.kind.name(), w.kind.principal());
        for u in w.inputs.iter().chain(&w.outputs) {
            let _ = write!(s, " {}", u.0 + 1);
        }
        s.push('\n');
    }
    for h in graph.hypothesis_ids() {
        let _ = writeln!(s, "h {}", h.0 + 1);
    }
    if let Some(g) = graph.goal() {
        let _ = writeln!(s, "g {}", g.0 + 1);
    }
    if let Some(flow) = flow {
        for (i, v) in flow.values().iter().enumerate() {
            let _ = writeln!(s, "w {} {}", i + 1, v);
        }
    }
    s
}

fn monomial_token(tok: &Token<'_>) -> Result<(Twin, u32), ParseError> {
    let (base, exp) = match tok.text.split_once('^') {
        Some((b, e)) => (b, e.parse::<u32>().map_err(|_| tok.error("bad exponent"))?),
        None => (tok.text, 1),
    };
    let twin: Twin = base
        .parse()
        .map_err(|_| tok.error(format!("bad monomial factor `{}`", tok.text)))?;
    if twin == 0 || exp == 0 {
        return Err(tok.error("factor needs a nonzero variable and exponent"));
    }
    Ok((twin, exp))
}

fn write_monomial(s: &mut String, m: &Monomial) {
    for (twin, exp) in m.powers() {
        let sign = if twin > 0 { '+' } else { '-' };
        let _ = write!(s, " {sign}{}", twin.unsigned_abs());
        if exp > 1 {
            let _ = write!(s, "^{exp}");
        }
    }
}

pub fn parse_sap(text: &str) -> Result<SaProof, ParseError> {
    let mut lines = content_lines(text);
    let header = lines.next().ok_or_else(|| end_of_text(text))?;
    if header[0].text != "p" || header.get(1).map(|t| t.text) != Some("sap") {
        return Err(header[0].error("expected `p sap <vars> <hypotheses>`"));
    }
    expect_len(&header, 4, "p sap <vars> <hypotheses>")?;
    let n: u32 = header[2].parse("a variable count")?;
    let nh: usize = header[3].parse("a hypothesis count")?;
    let mut hypotheses = Vec::new();
    let mut goal = None;
    let mut terms = Vec::new();
    let mut last = header[0];
    for toks in lines {
        last = toks[0];
        match toks[0].text {
            "h" => {
                if hypotheses.len() == nh {
                    return Err(toks[0].error(format!("more than the declared {nh} hypotheses")));
                }
                hypotheses.push(zero_terminated(&toks[1..], Some(n)).map_err(|e| fix_empty(e, &toks[0]))?);
            }
            "g" => {
                if goal.is_some() {
                    return Err(toks[0].error("second goal line"));
                }
                goal = Some(zero_terminated(&toks[1..], Some(n)).map_err(|e| fix_empty(e, &toks[0]))?);
            }
            "t" => {
                if toks.len() < 2 {
                    return Err(toks[0].error("expected `t <coef> <mono> ; <ref>`"));
                }
                let coefficient = rational_token(&toks[1])?;
                let semi = toks
                    .iter()
                    .position(|t| t.text == ";")
                    .ok_or_else(|| toks[0].error("missing `;` before the reference polynomial"))?;
                let mut powers: BTreeMap<Twin, u32> = BTreeMap::new();
                for tok in &toks[2..semi] {
                    let (twin, exp) = monomial_token(tok)?;
                    if powers.insert(twin, exp).is_some() {
                        return Err(tok.error("factor repeated"));
                    }
                    if twin.unsigned_abs() > n as u64 {
                        return Err(tok.error(format!("variable exceeds the declared {n}")));
                    }
                }
                let reference = reference_tokens(&toks[semi + 1..], &toks[semi], n, nh)?;
                terms.push(SaTerm::new(coefficient, Monomial::from_powers(powers), reference));
            }
            "p" => return Err(toks[0].error("second header")),
            other => return Err(toks[0].error(format!("unknown line type `{other}`"))),
        }
    }
    if hypotheses.len() != nh {
        return Err(last.error(format!(
            "header declares {nh} hypotheses but {} were given",
            hypotheses.len()
        )));
    }
    let goal = goal.ok_or_else(|| last.error("missing goal line"))?;
    Ok(SaProof {
        num_variables: n,
        hypotheses,
        goal,
        terms,
    })
}

fn fix_empty(e: ParseError, at: &Token<'_>) -> ParseError {
    if e.line == 0 {
        at.error("expected literals ending in 0")
    } else {
        e
    }
}

fn reference_tokens(
    toks: &[Token<'_>],
    semi: &Token<'_>,
    n: u32,
    nh: usize,
) -> Result<RefPolynomial, ParseError> {
    let words: Vec<&str> = toks.iter().map(|t| t.text).collect();
    let var = |t: &Token<'_>| -> Result<u32, ParseError> {
        let v: u32 = t.parse("a variable")?;
        if v == 0 || v > n {
            return Err(t.error(format!("variable {v} outside 1..={n}")));
        }
        Ok(v)
    };
    match words.as_slice() {
        ["H", _] => {
            let i: usize = toks[1].parse("a hypothesis index")?;
            if i == 0 || i > nh {
                return Err(toks[1].error(format!("hypothesis {i} outside 1..={nh}")));
            }
            Ok(RefPolynomial::Hypothesis(i))
        }
        ["B", "xxsq", _] => Ok(RefPolynomial::XsqMinusX(var(&toks[2])?)),
        ["B", "xsqx", _] => Ok(RefPolynomial::XMinusXsq(var(&toks[2])?)),
        ["B", "1mxx", _] => Ok(RefPolynomial::OneMinusXMinusXbar(var(&toks[2])?)),
        ["B", "xxm1", _] => Ok(RefPolynomial::XPlusXbarMinusOne(var(&toks[2])?)),
        ["B", "one"] => Ok(RefPolynomial::One),
        _ => Err(toks.first().unwrap_or(semi).error("unknown reference polynomial")),
    }
}

fn reference_text(r: RefPolynomial) -> String {
    match r {
        RefPolynomial::Hypothesis(i) => format!("H {i}"),
        RefPolynomial::XsqMinusX(v) => format!("B xxsq {v}"),
        RefPolynomial::XMinusXsq(v) => format!("B xsqx {v}"),
        RefPolynomial::OneMinusXMinusXbar(v) => format!("B 1mxx {v}"),
        RefPolynomial::XPlusXbarMinusOne(v) => format!("B xxm1 {v}"),
        RefPolynomial::One => "B one".into(),
    }
}

pub fn write_sap(proof: &SaProof) -> String {
    let mut s = format!("p sap {} {}\n", proof.num_variables, proof.hypotheses.len());
    for h in &proof.hypotheses {
        let _ = writeln!(s, "h {}", clause_line(h));
    }
    let _ = writeln!(s, "g {}", clause_line(&proof.goal));
    for t in &proof.terms {
        let _ = write!(s, "t {}", t.coefficient);
        write_monomial(&mut s, &t.monomial);
        let _ = writeln!(s, " ; {}", reference_text(t.reference));
    }
    s
}

/// Edge list: header `p edge <left> <right> <edges>` then one `u v` line
/// per edge.
pub fn parse_edges(text: &str) -> Result<BipartiteGraph, ParseError> {
    let mut lines = content_lines(text);
    let header = lines.next().ok_or_else(|| end_of_text(text))?;
    if header[0].text != "p" || header.get(1).map(|t| t.text) != Some("edge") {
        return Err(header[0].error("expected `p edge <left> <right> <edges>`"));
    }
    expect_len(&header, 5, "p edge <left> <right> <edges>")?;
    let left: u32 = header[2].parse("a vertex count")?;
    let right: u32 = header[3].parse("a vertex count")?;
    let m: usize = header[4].parse("an edge count")?;
    let mut edges = Vec::new();
    let mut last = header[4];
    for toks in lines {
        last = toks[0];
        expect_len(&toks, 2, "<left> <right>")?;
        let u = id_token(&toks[0], left as usize, "left vertex")? as u32 + 1;
        let v = id_token(&toks[1], right as usize, "right vertex")? as u32 + 1;
        if edges.contains(&(u, v)) {
            return Err(toks[0].error("repeated edge"));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(last.error(format!(
            "header declares {m} edges but {} were given",
            edges.len()
        )));
    }
    BipartiteGraph::new(left, right, edges).map_err(|e| header[0].error(e.to_string()))
}

pub fn write_edges(graph: &BipartiteGraph) -> String {
    let mut s = format!(
        "p edge {} {} {}\n",
        graph.left_size(),
        graph.right_size(),
        graph.edges().len()
    );
    for (u, v) in graph.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}
