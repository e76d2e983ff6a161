use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::sample::{AncillaDescriptor, ShadowSample};
use crate::bits::Bits;
use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::teleport::BellOutcome;

#[derive(Serialize, Deserialize)]
struct LogRecord {
    ensemble: String,
    n: usize,
    descriptor: String,
    value: String,
    a: String,
    b: String,
}

/// One NDJSON line with hex-encoded descriptor and outcome bits.
pub fn to_log_line(sample: &ShadowSample) -> Result<String> {
    let (ensemble, n) = match sample.ensemble {
        EnsembleSpec::CliffordStates { n } => ("clifford-states", n),
        EnsembleSpec::HaarStates { n } => ("haar-states", n),
        EnsembleSpec::LocalStab { n } => ("local-stab", n),
        other => return Err(Error::WrongEnsemble(format!("{other:?} is not an ancilla ensemble"))),
    };
    let (descriptor, value) = match sample.descriptor {
        AncillaDescriptor::Stabilizer(i) => ("stabilizer", i as u64),
        AncillaDescriptor::Seed(s) => ("seed", s),
        AncillaDescriptor::Local(c) => ("local", c),
    };
    let record = LogRecord {
        ensemble: ensemble.into(),
        n,
        descriptor: descriptor.into(),
        value: format!("{value:x}"),
        a: sample.outcome.a.to_hex(),
        b: sample.outcome.b.to_hex(),
    };
    Ok(serde_json::to_string(&record)?)
}

pub fn parse_log_line(line: &str) -> Result<ShadowSample> {
    let r: LogRecord = serde_json::from_str(line)?;
    let ensemble = match r.ensemble.as_str() {
        "clifford-states" => EnsembleSpec::CliffordStates { n: r.n },
        "haar-states" => EnsembleSpec::HaarStates { n: r.n },
        "local-stab" => EnsembleSpec::LocalStab { n: r.n },
        other => return Err(Error::WrongEnsemble(format!("unknown ensemble `{other}`"))),
    };
    let value = u64::from_str_radix(&r.value, 16).map_err(|e| Error::invalid(format!("descriptor value: {e}")))?;
    let descriptor = match r.descriptor.as_str() {
        "stabilizer" => AncillaDescriptor::Stabilizer(
            u32::try_from(value).map_err(|_| Error::invalid("stabilizer index too large"))?,
        ),
        "seed" => AncillaDescriptor::Seed(value),
        "local" => AncillaDescriptor::Local(value),
        other => return Err(Error::invalid(format!("unknown descriptor kind `{other}`"))),
    };
    let outcome = BellOutcome::new(Bits::from_hex(r.n, &r.a)?, Bits::from_hex(r.n, &r.b)?)?;
    Ok(ShadowSample { ensemble, descriptor, outcome })
}

pub fn write_log<W: Write>(mut w: W, samples: &[ShadowSample]) -> Result<()> {
    for s in samples {
        writeln!(w, "{}", to_log_line(s)?)?;
    }
    Ok(())
}

/// Blank lines are skipped; errors carry the 1-based line number.
pub fn read_log<R: BufRead>(r: R) -> Result<Vec<ShadowSample>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_log_line(&line).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::shadow::sample_shadow;

    #[test]
    fn round_trip() {
        let mut g = rng::from_seed(31);
        let rho = crate::ensembles::sample_density_matrix(3, &mut g).unwrap();
        let samples: Vec<ShadowSample> = [
            EnsembleSpec::CliffordStates { n: 3 },
            EnsembleSpec::HaarStates { n: 3 },
            EnsembleSpec::LocalStab { n: 3 },
        ]
        .iter()
        .flat_map(|e| (0..5).map(|_| sample_shadow(&rho, e, &mut g).unwrap()).collect::<Vec<_>>())
        .collect();
        let mut buf = Vec::new();
        write_log(&mut buf, &samples).unwrap();
        assert_eq!(read_log(buf.as_slice()).unwrap(), samples);
        assert!(read_log("{}\n".as_bytes()).is_err());
    }
}
