use std::fmt;
use std::str::FromStr;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::linalg::C;
use crate::rng::Stream;
use crate::sim::{PureState, Unitary};

/// Measurement basis for one note qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Computational,
    Hadamard,
}

/// One of the four single-qubit note states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    Zero,
    One,
    Plus,
    Minus,
}

impl Cell {
    pub const ALL: [Cell; 4] = [Cell::Zero, Cell::One, Cell::Plus, Cell::Minus];

    pub fn basis(self) -> Basis {
        match self {
            Cell::Zero | Cell::One => Basis::Computational,
            Cell::Plus | Cell::Minus => Basis::Hadamard,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Cell::Zero | Cell::Plus => 0,
            Cell::One | Cell::Minus => 1,
        }
    }

    pub fn from_parts(basis: Basis, bit: u8) -> Cell {
        match (basis, bit & 1) {
            (Basis::Computational, 0) => Cell::Zero,
            (Basis::Computational, _) => Cell::One,
            (Basis::Hadamard, 0) => Cell::Plus,
            (Basis::Hadamard, _) => Cell::Minus,
        }
    }

    pub fn state(self) -> PureState {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let amps = match self {
            Cell::Zero => vec![C::new(1.0, 0.0), C::new(0.0, 0.0)],
            Cell::One => vec![C::new(0.0, 0.0), C::new(1.0, 0.0)],
            Cell::Plus => vec![C::new(r, 0.0), C::new(r, 0.0)],
            Cell::Minus => vec![C::new(r, 0.0), C::new(-r, 0.0)],
        };
        PureState::new(1, Array1::from_vec(amps)).expect("cell states are unit vectors")
    }

    pub fn glyph(self) -> char {
        match self {
            Cell::Zero => '0',
            Cell::One => '1',
            Cell::Plus => '+',
            Cell::Minus => '-',
        }
    }

    pub fn from_glyph(c: char) -> Result<Cell> {
        match c {
            '0' => Ok(Cell::Zero),
            '1' => Ok(Cell::One),
            '+' => Ok(Cell::Plus),
            '-' => Ok(Cell::Minus),
            other => Err(Error::Parse(format!("unknown cell glyph {other:?}"))),
        }
    }
}

/// A note's secret key: basis and bit per qubit. Text form is one glyph per
/// qubit over the alphabet 01+-.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BasisString {
    cells: Vec<Cell>,
}

impl BasisString {
    pub fn new(cells: Vec<Cell>) -> Result<Self> {
        if cells.is_empty() || cells.len() > crate::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "key length {} outside 1..={}",
                cells.len(),
                crate::MAX_QUBITS
            )));
        }
        Ok(BasisString { cells })
    }

    pub fn random(n: usize, rng: &mut Stream) -> Result<Self> {
        let cells = (0..n).map(|_| Cell::ALL[rng.below(4) as usize]).collect();
        Self::new(cells)
    }

    pub fn n(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, i: usize) -> Cell {
        self.cells[i]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// The full note state, qubit i in cell i.
    pub fn state(&self) -> PureState {
        let mut psi = self.cells[0].state();
        for cell in &self.cells[1..] {
            psi = psi.tensor(&cell.state()).expect("key length is within capacity");
        }
        psi
    }

    /// Rotation that maps each qubit's recorded basis onto the computational
    /// one: H exactly on the Hadamard-basis positions. Applying it to a
    /// genuine note yields |bit_0 ... bit_{n-1}>.
    pub fn decode_rotation(&self, psi: &PureState, offset: usize) -> Result<PureState> {
        let h = Unitary::hadamard();
        let mut out = psi.clone();
        for (i, cell) in self.cells.iter().enumerate() {
            if cell.basis() == Basis::Hadamard {
                out = out.apply_1q(&h, offset + i)?;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for BasisString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cell in &self.cells {
            write!(f, "{}", cell.glyph())?;
        }
        Ok(())
    }
}

impl FromStr for BasisString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cells: Result<Vec<Cell>> = s.chars().map(Cell::from_glyph).collect();
        BasisString::new(cells?)
    }
}

/// A serial number plus the quantum part.
#[derive(Clone, Debug)]
pub struct Banknote {
    pub serial: u64,
    pub state: PureState,
}

impl Banknote {
    pub fn n(&self) -> usize {
        self.state.n()
    }

    /// Stable JSON form: {"serial": "0x..", "n": .., "amplitudes": [[re, im], ..]}.
    /// Floats use the shortest representation that round-trips.
    pub fn to_json(&self) -> String {
        let mut s = String::with_capacity(32 + 16 * self.state.dim());
        s.push_str("{\"serial\":\"");
        s.push_str(&format!("{:#018x}", self.serial));
        s.push_str("\",\"n\":");
        s.push_str(&self.n().to_string());
        s.push_str(",\"amplitudes\":[");
        for (i, a) in self.state.amps().iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push('[');
            push_f64(&mut s, a.re);
            s.push(',');
            push_f64(&mut s, a.im);
            s.push(']');
        }
        s.push_str("]}");
        s
    }

    pub fn from_json(text: &str) -> Result<Banknote> {
        let v = json::parse(text)?;
        let obj = v.as_object().ok_or_else(|| Error::Parse("note must be an object".into()))?;
        let serial_text = obj
            .get("serial")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Parse("missing serial".into()))?;
        let serial = serial_text
            .strip_prefix("0x")
            .and_then(|h| u64::from_str_radix(h, 16).ok())
            .ok_or_else(|| Error::Parse(format!("bad serial {serial_text:?}")))?;
        let n = obj
            .get("n")
            .and_then(|v| v.as_f64())
            .filter(|x| x.fract() == 0.0 && *x >= 1.0)
            .ok_or_else(|| Error::Parse("missing or bad qubit count".into()))?
            as usize;
        let amp_rows = obj
            .get("amplitudes")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::Parse("missing amplitudes".into()))?;
        let mut amps = Vec::with_capacity(amp_rows.len());
        for row in amp_rows {
            let pair = row.as_array().ok_or_else(|| Error::Parse("amplitude rows must be [re, im]".into()))?;
            if pair.len() != 2 {
                return Err(Error::Parse("amplitude rows must be [re, im]".into()));
            }
            let re = pair[0].as_f64().ok_or_else(|| Error::Parse("non-numeric amplitude".into()))?;
            let im = pair[1].as_f64().ok_or_else(|| Error::Parse("non-numeric amplitude".into()))?;
            amps.push(C::new(re, im));
        }
        let state = PureState::new(n, Array1::from_vec(amps))?;
        Ok(Banknote { serial, state })
    }
}

fn push_f64(s: &mut String, x: f64) {
    if x == x.trunc() && x.abs() < 1e15 {
        // Keep integral values unambiguous JSON numbers with a decimal point.
        s.push_str(&format!("{:.1}", x));
    } else {
        s.push_str(&format!("{x}"));
    }
}

/// Minimal JSON reader covering the note schema: objects, arrays, strings
/// (no escapes beyond \\ \" \/), and floating point numbers.
mod json {
    use std::collections::BTreeMap;

    use crate::error::{Error, Result};

    #[derive(Debug)]
    pub enum Value {
        Object(BTreeMap<String, Value>),
        Array(Vec<Value>),
        Text(String),
        Number(f64),
    }

    impl Value {
        pub fn as_object(&self) -> Option<&BTreeMap<String, Value>> {
            match self {
                Value::Object(m) => Some(m),
                _ => None,
            }
        }

        pub fn as_array(&self) -> Option<&[Value]> {
            match self {
                Value::Array(v) => Some(v),
                _ => None,
            }
        }

        pub fn as_str(&self) -> Option<&str> {
            match self {
                Value::Text(s) => Some(s),
                _ => None,
            }
        }

        pub fn as_f64(&self) -> Option<f64> {
            match self {
                Value::Number(x) => Some(*x),
                _ => None,
            }
        }
    }

    pub fn parse(text: &str) -> Result<Value> {
        let bytes = text.as_bytes();
        let mut pos = 0usize;
        let v = value(bytes, &mut pos)?;
        skip_ws(bytes, &mut pos);
        if pos != bytes.len() {
            return Err(Error::Parse(format!("trailing data at byte {pos}")));
        }
        Ok(v)
    }

    fn skip_ws(b: &[u8], pos: &mut usize) {
        while *pos < b.len() && matches!(b[*pos], b' ' | b'\t' | b'\n' | b'\r') {
            *pos += 1;
        }
    }

    fn expect(b: &[u8], pos: &mut usize, c: u8) -> Result<()> {
        if *pos < b.len() && b[*pos] == c {
            *pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {:?} at byte {}", c as char, *pos)))
        }
    }

    fn value(b: &[u8], pos: &mut usize) -> Result<Value> {
        skip_ws(b, pos);
        match b.get(*pos) {
            Some(b'{') => object(b, pos),
            Some(b'[') => array(b, pos),
            Some(b'"') => Ok(Value::Text(string(b, pos)?)),
            Some(c) if *c == b'-' || c.is_ascii_digit() => number(b, pos),
            other => Err(Error::Parse(format!("unexpected {other:?} at byte {pos}"))),
        }
    }

    fn object(b: &[u8], pos: &mut usize) -> Result<Value> {
        expect(b, pos, b'{')?;
        let mut map = BTreeMap::new();
        skip_ws(b, pos);
        if b.get(*pos) == Some(&b'}') {
            *pos += 1;
            return Ok(Value::Object(map));
        }
        loop {
            skip_ws(b, pos);
            let key = string(b, pos)?;
            skip_ws(b, pos);
            expect(b, pos, b':')?;
            let v = value(b, pos)?;
            map.insert(key, v);
            skip_ws(b, pos);
            match b.get(*pos) {
                Some(b',') => *pos += 1,
                Some(b'}') => {
                    *pos += 1;
                    return Ok(Value::Object(map));
                }
                _ => return Err(Error::Parse(format!("expected , or }} at byte {pos}"))),
            }
        }
    }

    fn array(b: &[u8], pos: &mut usize) -> Result<Value> {
        expect(b, pos, b'[')?;
        let mut items = Vec::new();
        skip_ws(b, pos);
        if b.get(*pos) == Some(&b']') {
            *pos += 1;
            return Ok(Value::Array(items));
        }
        loop {
            items.push(value(b, pos)?);
            skip_ws(b, pos);
            match b.get(*pos) {
                Some(b',') => *pos += 1,
                Some(b']') => {
                    *pos += 1;
                    return Ok(Value::Array(items));
                }
                _ => return Err(Error::Parse(format!("expected , or ] at byte {pos}"))),
            }
        }
    }

    fn string(b: &[u8], pos: &mut usize) -> Result<String> {
        expect(b, pos, b'"')?;
        let mut out = String::new();
        while let Some(&c) = b.get(*pos) {
            *pos += 1;
            match c {
                b'"' => return Ok(out),
                b'\\' => {
                    let esc = b.get(*pos).copied();
                    *pos += 1;
                    match esc {
                        Some(b'"') => out.push('"'),
                        Some(b'\\') => out.push('\\'),
                        Some(b'/') => out.push('/'),
                        other => {
                            return Err(Error::Parse(format!("unsupported escape {other:?}")))
                        }
                    }
                }
                _ => out.push(c as char),
            }
        }
        Err(Error::Parse("unterminated string".into()))
    }

    fn number(b: &[u8], pos: &mut usize) -> Result<Value> {
        let start = *pos;
        while *pos < b.len()
            && matches!(b[*pos], b'0'..=b'9' | b'-' | b'+' | b'.' | b'e' | b'E')
        {
            *pos += 1;
        }
        let text = std::str::from_utf8(&b[start..*pos])
            .map_err(|_| Error::Parse("bad number bytes".into()))?;
        text.parse::<f64>()
            .map(Value::Number)
            .map_err(|_| Error::Parse(format!("bad number {text:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_have_the_right_overlaps() {
        // Same basis: orthogonal. Cross basis: |overlap|^2 = 1/2.
        for a in Cell::ALL {
            for b in Cell::ALL {
                let ov = a.state().overlap_sq(&b.state()).unwrap();
                let want = if a == b {
                    1.0
                } else if a.basis() == b.basis() {
                    0.0
                } else {
                    0.5
                };
                assert!((ov - want).abs() < 1e-12, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn key_text_round_trip() {
        let key: BasisString = "01+-".parse().unwrap();
        assert_eq!(key.to_string(), "01+-");
        assert_eq!(key.cell(2), Cell::Plus);
        assert!("01x".parse::<BasisString>().is_err());
        assert!("".parse::<BasisString>().is_err());
    }

    #[test]
    fn key_state_decodes_to_bits() {
        let key: BasisString = "1+0-".parse().unwrap();
        let decoded = key.decode_rotation(&key.state(), 0).unwrap();
        // After rotating each qubit into its basis the state is |1 0 0 1>.
        let p = decoded.probability(&[0, 1, 2, 3], &[1, 0, 0, 1]).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn note_json_round_trip() {
        let mut rng = Stream::from_seed(601);
        let key = BasisString::random(3, &mut rng).unwrap();
        let note = Banknote { serial: 0xDEAD_BEEF_0BAD_F00D, state: key.state() };
        let text = note.to_json();
        let back = Banknote::from_json(&text).unwrap();
        assert_eq!(back.serial, note.serial);
        assert!((back.state.overlap_sq(&note.state).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn note_json_round_trips_random_states_exactly() {
        let mut rng = Stream::from_seed(607);
        let state = PureState::random(4, &mut rng).unwrap();
        let note = Banknote { serial: 7, state };
        let back = Banknote::from_json(&note.to_json()).unwrap();
        for i in 0..note.state.dim() {
            assert_eq!(note.state.amp(i), back.state.amp(i), "amp {i} drifted");
        }
    }

    #[test]
    fn parser_rejects_malformed_notes() {
        assert!(Banknote::from_json("").is_err());
        assert!(Banknote::from_json("{}").is_err());
        assert!(Banknote::from_json("{\"serial\":\"0x1\",\"n\":1}").is_err());
        // Wrong amplitude count for the declared width.
        assert!(Banknote::from_json(
            "{\"serial\":\"0x1\",\"n\":2,\"amplitudes\":[[1.0,0.0],[0.0,0.0]]}"
        )
        .is_err());
        // Unnormalized.
        assert!(Banknote::from_json(
            "{\"serial\":\"0x1\",\"n\":1,\"amplitudes\":[[1.0,0.0],[1.0,0.0]]}"
        )
        .is_err());
    }
}
