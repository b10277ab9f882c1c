//! Plain-text program and result files.
//!
//! Program grammar (one record per line, `#` starts a comment line):
//!
//! ```text
//! polycert-conic 1
//! free <F>
//! nonneg <K>
//! psd <count> <s_1> … <s_count>
//! columns <N>
//! rows <M>
//! objective <nnz>        followed by nnz lines `<col> <value>`
//! rhs <nnz>              followed by nnz lines `<row> <value>`
//! matrix <nnz>           followed by nnz lines `<row> <col> <value>`
//! end
//! ```
//!
//! Values use the shortest representation that round-trips an `f64`, so a
//! program re-serializes byte for byte.
//!
//! Result grammar:
//!
//! ```text
//! status <optimal|infeasible|unbounded|numerical-failure|time-limit>
//! objective <value>
//! iterations <k>
//! primal <n>             followed by n values, one per line
//! dual <m>               followed by m values, one per line
//! ```

use std::fmt::Write;

use super::{ConicError, ConicProgram, SolverResult, SolverStatus};

pub fn serialize_program(p: &ConicProgram) -> String {
    let mut s = String::new();
    s.push_str("polycert-conic 1\n");
    let _ = writeln!(s, "free {}", p.free_vars);
    let _ = writeln!(s, "nonneg {}", p.nonneg_vars);
    let _ = write!(s, "psd {}", p.psd_blocks.len());
    for b in &p.psd_blocks {
        let _ = write!(s, " {b}");
    }
    s.push('\n');
    let _ = writeln!(s, "columns {}", p.ncols());
    let _ = writeln!(s, "rows {}", p.rows.len());
    let _ = writeln!(s, "objective {}", p.objective.len());
    for (j, v) in &p.objective {
        let _ = writeln!(s, "{j} {v:?}");
    }
    let rhs: Vec<(usize, f64)> = p.b.iter().cloned().enumerate().filter(|(_, v)| *v != 0.0).collect();
    let _ = writeln!(s, "rhs {}", rhs.len());
    for (i, v) in rhs {
        let _ = writeln!(s, "{i} {v:?}");
    }
    let _ = writeln!(s, "matrix {}", p.nnz());
    for (i, row) in p.rows.iter().enumerate() {
        for (j, v) in row {
            let _ = writeln!(s, "{i} {j} {v:?}");
        }
    }
    s.push_str("end\n");
    s
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { it: text.lines().enumerate(), line: 0 }
    }

    fn err(&self, message: impl Into<String>) -> ConicError {
        ConicError::Parse { line: self.line, message: message.into() }
    }

    fn next(&mut self) -> Result<Vec<&'a str>, ConicError> {
        for (i, l) in self.it.by_ref() {
            self.line = i + 1;
            let l = l.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            return Ok(l.split_whitespace().collect());
        }
        Err(ConicError::Parse { line: self.line + 1, message: "unexpected end of input".into() })
    }

    fn keyword(&mut self, kw: &str) -> Result<Vec<&'a str>, ConicError> {
        let t = self.next()?;
        if t[0] != kw {
            return Err(self.err(format!("expected `{kw}`, found `{}`", t[0])));
        }
        Ok(t[1..].to_vec())
    }

    fn count(&mut self, kw: &str) -> Result<usize, ConicError> {
        let t = self.keyword(kw)?;
        if t.len() != 1 {
            return Err(self.err(format!("`{kw}` takes one value")));
        }
        self.usize(t[0])
    }

    fn usize(&self, s: &str) -> Result<usize, ConicError> {
        s.parse().map_err(|_| self.err(format!("bad integer `{s}`")))
    }

    fn f64(&self, s: &str) -> Result<f64, ConicError> {
        s.parse().map_err(|_| self.err(format!("bad number `{s}`")))
    }
}

pub fn parse_program(text: &str) -> Result<ConicProgram, ConicError> {
    let mut ls = Lines::new(text);
    let head = ls.next()?;
    if head != ["polycert-conic", "1"] {
        return Err(ls.err("missing `polycert-conic 1` header"));
    }
    let free_vars = ls.count("free")?;
    let nonneg_vars = ls.count("nonneg")?;
    let t = ls.keyword("psd")?;
    if t.is_empty() {
        return Err(ls.err("`psd` needs a block count"));
    }
    let nb = ls.usize(t[0])?;
    if t.len() != nb + 1 {
        return Err(ls.err("psd block count does not match the sizes given"));
    }
    let psd_blocks = t[1..].iter().map(|s| ls.usize(s)).collect::<Result<Vec<_>, _>>()?;
    let columns = ls.count("columns")?;
    let nrows = ls.count("rows")?;
    let mut p = ConicProgram {
        free_vars,
        nonneg_vars,
        psd_blocks,
        rows: vec![Vec::new(); nrows],
        b: vec![0.0; nrows],
        objective: Vec::new(),
    };
    if p.ncols() != columns {
        return Err(ls.err(format!("header says {columns} columns, block structure gives {}", p.ncols())));
    }
    let k = ls.count("objective")?;
    for _ in 0..k {
        let t = ls.next()?;
        if t.len() != 2 {
            return Err(ls.err("objective entries are `<col> <value>`"));
        }
        p.objective.push((ls.usize(t[0])?, ls.f64(t[1])?));
    }
    let k = ls.count("rhs")?;
    for _ in 0..k {
        let t = ls.next()?;
        if t.len() != 2 {
            return Err(ls.err("rhs entries are `<row> <value>`"));
        }
        let i = ls.usize(t[0])?;
        if i >= nrows {
            return Err(ls.err(format!("row {i} out of range")));
        }
        p.b[i] = ls.f64(t[1])?;
    }
    let k = ls.count("matrix")?;
    for _ in 0..k {
        let t = ls.next()?;
        if t.len() != 3 {
            return Err(ls.err("matrix entries are `<row> <col> <value>`"));
        }
        let i = ls.usize(t[0])?;
        if i >= nrows {
            return Err(ls.err(format!("row {i} out of range")));
        }
        let j = ls.usize(t[1])?;
        let v = ls.f64(t[2])?;
        p.rows[i].push((j, v));
    }
    ls.keyword("end")?;
    p.validate()?;
    Ok(p)
}

pub fn serialize_result(r: &SolverResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "status {}", r.status.as_str());
    let _ = writeln!(s, "objective {:?}", r.objective);
    let _ = writeln!(s, "iterations {}", r.iterations);
    let _ = writeln!(s, "primal {}", r.primal.len());
    for v in &r.primal {
        let _ = writeln!(s, "{v:?}");
    }
    let _ = writeln!(s, "dual {}", r.dual.len());
    for v in &r.dual {
        let _ = writeln!(s, "{v:?}");
    }
    s
}

pub fn parse_result(text: &str, backend: &str) -> Result<SolverResult, ConicError> {
    let mut ls = Lines::new(text);
    let t = ls.keyword("status")?;
    let status = t
        .first()
        .and_then(|s| SolverStatus::parse(s))
        .ok_or_else(|| ls.err("unknown status"))?;
    let t = ls.keyword("objective")?;
    let objective = ls.f64(t.first().copied().unwrap_or(""))?;
    let iterations = ls.count("iterations")?;
    let mut read_vec = |kw: &str| -> Result<Vec<f64>, ConicError> {
        let k = ls.count(kw)?;
        let mut v = Vec::with_capacity(k);
        for _ in 0..k {
            let t = ls.next()?;
            v.push(ls.f64(t[0])?);
        }
        Ok(v)
    };
    let primal = read_vec("primal")?;
    let dual = read_vec("dual")?;
    Ok(SolverResult {
        status,
        objective,
        primal,
        dual,
        iterations,
        wall_time: 0.0,
        basis: None,
        residual: None,
        backend: backend.to_owned(),
    })
}
