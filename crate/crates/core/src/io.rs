//! File formats: text Hamiltonians, JSON circuits and JSON result files.
//!
//! JSON output uses struct field order for keys and prints every float with
//! 17 significant digits, so a value written and read back is bit-identical.

use crate::circuit::{Circuit, Gate, LadderCircuit};
use crate::error::{Error, Result};
use crate::opt::TraceEntry;
use crate::pauli::{PauliString, PauliSum, DEFAULT_TOL};
use crate::tableau::CliffordGate;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// `-1.2345678901234567e-3` style, 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses the text Hamiltonian format: an optional `qubits <n>` header,
/// then `<coefficient> <pauli-word>` lines. `#` starts a comment.
/// Duplicate words are merged.
pub fn parse_hamiltonian(text: &str) -> Result<PauliSum> {
    let mut n: Option<usize> = None;
    let mut terms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let perr = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "qubits" {
            if n.is_some() || !terms.is_empty() {
                return Err(perr("'qubits' header must come first and only once".into()));
            }
            if fields.len() != 2 {
                return Err(perr("expected 'qubits <n>'".into()));
            }
            let v: usize = fields[1].parse().map_err(|_| perr(format!("invalid qubit count '{}'", fields[1])))?;
            if v == 0 {
                return Err(perr("qubit count must be positive".into()));
            }
            n = Some(v);
            continue;
        }
        if fields.len() != 2 {
            return Err(perr(format!("expected '<coefficient> <pauli-word>', got '{line}'")));
        }
        let coeff: f64 = fields[0]
            .parse()
            .map_err(|_| perr(format!("invalid coefficient '{}'", fields[0])))?;
        if !coeff.is_finite() {
            return Err(perr(format!("non-finite coefficient '{}'", fields[0])));
        }
        let word = fields[1];
        if let Some(bad) = word.chars().find(|c| !"IXYZ".contains(*c)) {
            return Err(perr(format!("invalid Pauli letter '{bad}' in '{word}'")));
        }
        let len = word.chars().count();
        match n {
            Some(m) if m != len => {
                return Err(perr(format!("word '{word}' has length {len}, expected {m}")));
            }
            None => n = Some(len),
            _ => {}
        }
        let p = PauliString::from_word(word).map_err(|e| perr(e.to_string()))?;
        terms.push((coeff, p));
    }
    let n = n.ok_or(Error::Parse { line: 0, msg: "empty Hamiltonian file".into() })?;
    PauliSum::from_terms(n, terms)?.canonicalize(DEFAULT_TOL)
}

pub fn load_hamiltonian(path: &Path) -> Result<PauliSum> {
    parse_hamiltonian(&std::fs::read_to_string(path)?)
}

/// Text form with a header and one canonical term per line.
pub fn format_hamiltonian(h: &PauliSum) -> String {
    let mut s = format!("qubits {}\n", h.n());
    for t in h.terms() {
        let _ = writeln!(s, "{} {}", format_f64(t.coeff), t.op.word_string());
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GateSpec {
    PauliRot { sites: [usize; 2], pauli: String },
    Rz { site: usize, theta: f64 },
}

/// JSON circuit in application order. `layers`, `rz_layer` and `tail_len`
/// describe a brickwork ladder when present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rz_layer: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_len: Option<usize>,
    pub gates: Vec<GateSpec>,
}

impl CircuitFile {
    pub fn from_circuit(c: &Circuit) -> Self {
        let gates = c
            .gates
            .iter()
            .map(|g| match g {
                Gate::Clifford(cg) => {
                    let (a, b) = cg.sites();
                    GateSpec::PauliRot { sites: [a, b], pauli: cg.label() }
                }
                Gate::Rz { site, theta } => GateSpec::Rz { site: *site, theta: *theta },
            })
            .collect();
        Self { n: c.n, layers: None, rz_layer: None, tail_len: None, gates }
    }

    pub fn from_ladder(c: &LadderCircuit) -> Self {
        Self {
            layers: Some(c.layers),
            rz_layer: Some(c.rz_layer),
            tail_len: Some(c.tail.len()),
            ..Self::from_circuit(&c.to_circuit())
        }
    }

    pub fn to_circuit(&self) -> Result<Circuit> {
        let gates = self
            .gates
            .iter()
            .map(|g| match g {
                GateSpec::PauliRot { sites, pauli } => Ok(Gate::Clifford(CliffordGate::from_label(sites[0], sites[1], pauli)?)),
                GateSpec::Rz { site, theta } => Ok(Gate::Rz { site: *site, theta: *theta }),
            })
            .collect::<Result<Vec<_>>>()?;
        Circuit::new(self.n, gates)
    }

    /// Rebuilds the ladder; needs the layout fields.
    pub fn to_ladder(&self) -> Result<LadderCircuit> {
        let layers = self
            .layers
            .ok_or_else(|| Error::Invalid("circuit file has no 'layers' field".into()))?;
        LadderCircuit::from_circuit(
            &self.to_circuit()?,
            layers,
            self.rz_layer.unwrap_or(layers),
            self.tail_len.unwrap_or(0),
        )
    }
}

/// Reads a circuit file, or the `best_circuit` of a result file.
pub fn load_circuit(path: &Path) -> Result<CircuitFile> {
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if v.get("schema_version").is_some() {
        v = v["best_circuit"].take();
        if v.is_null() {
            return Err(Error::Invalid(format!("{} holds no circuit", path.display())));
        }
    }
    let c: CircuitFile = serde_json::from_value(v)?;
    c.to_circuit()?;
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub restart_id: usize,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub schema_version: u32,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub best_cost: Option<f64>,
    pub best_circuit: Option<CircuitFile>,
    pub endpoints: Vec<Endpoint>,
    pub trace: Option<Vec<TraceEntry>>,
    /// Seconds; `None` unless requested, which keeps files reproducible.
    pub wall_time: Option<f64>,
    /// Command-specific payload.
    pub data: serde_json::Value,
}

impl ResultFile {
    pub fn new(command: &str, config: serde_json::Value, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config,
            seed,
            best_cost: None,
            best_circuit: None,
            endpoints: Vec::new(),
            trace: None,
            wall_time: None,
            data: serde_json::Value::Null,
        }
    }
}

struct Fmt17;

impl serde_json::ser::Formatter for Fmt17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        w.write_all(format_f64(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> std::io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

/// One JSON document, newline terminated.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fmt17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Writes through a temporary file in the same directory and renames it
/// into place. An existing file is replaced only with `force`.
pub fn write_atomic(path: &Path, contents: &str, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::Invalid(format!("{} exists; pass --force to overwrite", path.display())));
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Invalid(format!("invalid output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let res = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(res?)
}

/// Emits to `path`, or to stdout when `path` is `None`.
pub fn emit_result(result: &ResultFile, path: Option<&Path>, force: bool) -> Result<()> {
    let text = to_json(result)?;
    match path {
        Some(p) => write_atomic(p, &text, force),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn load_result(path: &Path) -> Result<ResultFile> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_and_terms() {
        let h = parse_hamiltonian("qubits 2\n1.0 ZZ\n-0.5 XI\n").unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.n(), 2);
    }

    #[test]
    fn merges_duplicates() {
        let h = parse_hamiltonian("0.5 Z\n0.5 Z # again\n\n").unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.terms()[0].coeff, 1.0);
    }

    #[test]
    fn reports_bad_line() {
        match parse_hamiltonian("# header\n0.5 XYQ\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_hamiltonian("qubits 3\n1 XX\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_hamiltonian("inf ZZ\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn hamiltonian_text_round_trip() {
        let h = parse_hamiltonian("0.1 XYZ\n-0.30000000000000004 ZZI\n1e-7 IIX\n").unwrap();
        assert_eq!(parse_hamiltonian(&format_hamiltonian(&h)).unwrap(), h);
    }

    #[test]
    fn floats_have_17_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        let s = to_json(&vec![0.1, -2.5]).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,-2.5000000000000000e0]\n");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, -2.5]);
    }

    #[test]
    fn ladder_round_trip() {
        let mut c = LadderCircuit::identity(3, 2).unwrap();
        c.codes[1] = 7;
        c.rz_sites = vec![2];
        c.thetas = vec![0.3];
        c.tail = vec![CliffordGate::new(0, 1, 4).unwrap()];
        let f = CircuitFile::from_ladder(&c);
        let text = to_json(&f).unwrap();
        let back: CircuitFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_ladder().unwrap(), c);
    }

    #[test]
    fn atomic_write_respects_force() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        let r = ResultFile::new("exact", serde_json::json!({"beta": 1.5}), 3);
        emit_result(&r, Some(&p), false).unwrap();
        assert!(emit_result(&r, Some(&p), false).is_err());
        emit_result(&r, Some(&p), true).unwrap();
        assert_eq!(load_result(&p).unwrap(), r);
    }
}
