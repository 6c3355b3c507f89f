//! Event-log serialization. Binary records are 13 bytes: time as f64 LE,
//! transition code as u8, site as i32 LE.

use std::io::{BufRead, Read, Write};

use crate::dynamics::{Event, TransitionKind};
use crate::error::{Error, Result};

pub const RECORD_BYTES: usize = 13;

pub fn write_binary<W: Write>(events: &[Event], mut w: W) -> Result<()> {
    for ev in events {
        let site = i32::try_from(ev.kind.site()).map_err(|_| Error::SiteOutOfRange(ev.kind.site()))?;
        w.write_all(&ev.time.to_le_bytes())?;
        w.write_all(&[ev.kind.code()])?;
        w.write_all(&site.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Vec<Event>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() % RECORD_BYTES != 0 {
        return Err(Error::Parse(format!("log length {} is not a multiple of {RECORD_BYTES}", buf.len())));
    }
    buf.chunks_exact(RECORD_BYTES)
        .map(|c| {
            let time = f64::from_le_bytes(c[0..8].try_into().unwrap());
            let site = i32::from_le_bytes(c[9..13].try_into().unwrap());
            Ok(Event { time, kind: TransitionKind::from_code(c[8], site as i64)? })
        })
        .collect()
}

pub fn write_csv<W: Write>(events: &[Event], mut w: W) -> Result<()> {
    writeln!(w, "time,code,site")?;
    for ev in events {
        writeln!(w, "{:e},{},{}", ev.time, ev.kind.code(), ev.kind.site())?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<Event>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Parse(format!("line {}: {line}", i + 1));
        let mut parts = line.split(',');
        let time: f64 = parts.next().and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
        let code: u8 = parts.next().and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
        let site: i64 = parts.next().and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
        out.push(Event { time, kind: TransitionKind::from_code(code, site)? });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Event> {
        vec![
            Event { time: 0.125, kind: TransitionKind::AsepInject },
            Event { time: 0.5, kind: TransitionKind::AsepRight(1) },
            Event { time: 1.0 / 3.0, kind: TransitionKind::FasepLeft(-7) },
        ]
    }

    #[test]
    fn binary_roundtrip() {
        let mut buf = Vec::new();
        write_binary(&sample(), &mut buf).unwrap();
        assert_eq!(buf.len(), 3 * RECORD_BYTES);
        assert_eq!(read_binary(&buf[..]).unwrap(), sample());
        assert!(read_binary(&buf[..5]).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let mut buf = Vec::new();
        write_csv(&sample(), &mut buf).unwrap();
        assert_eq!(read_csv(&buf[..]).unwrap(), sample());
    }
}
