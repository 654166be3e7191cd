//! Time-tag files.
//!
//! Binary layout: the four bytes `TTAG`, a version byte (1), then 9-byte
//! records `{channel: u8, time_ps: u64 little-endian}` in nondecreasing time
//! order. The CSV twin has the header `channel,time_ps`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::emitter::TimeTagStream;
use crate::error::{Error, Result};
use crate::modulator::csv_err;

pub const TAG_MAGIC: &[u8; 4] = b"TTAG";
pub const TAG_VERSION: u8 = 1;
const RECORD_LEN: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TagRecord {
    pub channel: u8,
    pub time_ps: u64,
}

fn merged_records(streams: &[&TimeTagStream]) -> Vec<TagRecord> {
    let mut recs: Vec<TagRecord> = streams
        .iter()
        .flat_map(|s| {
            s.timestamps().iter().map(|&t| TagRecord {
                channel: s.channel(),
                time_ps: t,
            })
        })
        .collect();
    recs.sort_by_key(|r| (r.time_ps, r.channel));
    recs
}

/// Writes the streams interleaved in time order.
pub fn write_tag_file<W: Write>(mut out: W, streams: &[&TimeTagStream]) -> Result<()> {
    out.write_all(TAG_MAGIC)?;
    out.write_all(&[TAG_VERSION])?;
    let recs = merged_records(streams);
    let mut buf = Vec::with_capacity(recs.len() * RECORD_LEN);
    for r in recs {
        buf.push(r.channel);
        buf.extend_from_slice(&r.time_ps.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

pub fn write_tag_csv<W: Write>(out: W, streams: &[&TimeTagStream]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["channel", "time_ps"]).map_err(csv_err)?;
    for r in merged_records(streams) {
        w.write_record([r.channel.to_string(), r.time_ps.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Groups records by channel. Each stream's duration is the last timestamp
/// in the file, which is all the format records about the acquisition.
fn into_streams(records: Vec<(u64, TagRecord)>) -> Result<BTreeMap<u8, TimeTagStream>> {
    let duration = records.last().map(|(_, r)| r.time_ps).unwrap_or(0);
    let mut by_channel: BTreeMap<u8, Vec<u64>> = BTreeMap::new();
    let mut last_time: Option<u64> = None;
    for (offset, r) in records {
        if let Some(prev) = last_time {
            if r.time_ps < prev {
                return Err(Error::Format {
                    offset,
                    reason: format!("time {} ps precedes previous record at {prev} ps", r.time_ps),
                });
            }
        }
        last_time = Some(r.time_ps);
        let tags = by_channel.entry(r.channel).or_default();
        if tags.last() == Some(&r.time_ps) {
            return Err(Error::Format {
                offset,
                reason: format!("duplicate time {} ps on channel {}", r.time_ps, r.channel),
            });
        }
        tags.push(r.time_ps);
    }
    Ok(by_channel
        .into_iter()
        .map(|(ch, tags)| (ch, TimeTagStream::from_sorted_unchecked(ch, tags, duration)))
        .collect())
}

pub fn read_tag_file<R: Read>(mut input: R) -> Result<BTreeMap<u8, TimeTagStream>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 4 || &bytes[..4] != TAG_MAGIC {
        return Err(Error::Format {
            offset: 0,
            reason: "missing TTAG magic".into(),
        });
    }
    match bytes.get(4) {
        Some(&TAG_VERSION) => {}
        Some(v) => {
            return Err(Error::Format {
                offset: 4,
                reason: format!("unsupported version {v}"),
            })
        }
        None => {
            return Err(Error::Format {
                offset: 4,
                reason: "missing version byte".into(),
            })
        }
    }
    let body = &bytes[5..];
    let whole = body.len() / RECORD_LEN * RECORD_LEN;
    if whole != body.len() {
        return Err(Error::Format {
            offset: (5 + whole) as u64,
            reason: format!("truncated record ({} trailing bytes)", body.len() - whole),
        });
    }
    let records = body
        .chunks_exact(RECORD_LEN)
        .enumerate()
        .map(|(i, rec)| {
            let time = u64::from_le_bytes(rec[1..].try_into().unwrap());
            (
                (5 + i * RECORD_LEN) as u64,
                TagRecord {
                    channel: rec[0],
                    time_ps: time,
                },
            )
        })
        .collect();
    into_streams(records)
}

pub fn read_tag_csv<R: Read>(input: R) -> Result<BTreeMap<u8, TimeTagStream>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["channel", "time_ps"] {
        return Err(Error::Format {
            offset: 0,
            reason: "expected header `channel,time_ps`".into(),
        });
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let offset = e.position().map(|p| p.byte()).unwrap_or(0);
            Error::Format {
                offset,
                reason: e.to_string(),
            }
        })?;
        let offset = row.position().map(|p| p.byte()).unwrap_or(0);
        let bad = |what: &str| Error::Format {
            offset,
            reason: format!("invalid {what}"),
        };
        let channel: u8 = row.get(0).ok_or_else(|| bad("channel"))?.trim().parse().map_err(|_| bad("channel"))?;
        let time: u64 = row.get(1).ok_or_else(|| bad("time_ps"))?.trim().parse().map_err(|_| bad("time_ps"))?;
        records.push((
            offset,
            TagRecord {
                channel,
                time_ps: time,
            },
        ));
    }
    into_streams(records)
}

/// Reads either format, chosen by the magic bytes.
pub fn read_tags_auto(bytes: &[u8]) -> Result<BTreeMap<u8, TimeTagStream>> {
    if bytes.starts_with(TAG_MAGIC) {
        read_tag_file(bytes)
    } else {
        read_tag_csv(bytes)
    }
}
