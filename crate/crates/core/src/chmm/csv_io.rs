//! CSV encoding of grids: header `t,j,value`, one row per cell, 1-based `t`
//! and `j`, rows ordered by time then individual.
//!
//! Hidden states are written 1-based. A missing observation is an empty
//! `value` field. Uniform grids use the shortest representation that
//! round-trips the `f64` exactly.

use std::io::{Read, Write};

use super::{Grid, HiddenStateMatrix, Observation, ObservationMatrix, UniformGrid};
use crate::error::{Error, Result};

const HEADER: [&str; 3] = ["t", "j", "value"];

fn write_grid<V, W: Write, F: Fn(&V) -> String>(grid: &Grid<V>, out: W, fmt: F) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for (cell, v) in grid.cells() {
        w.write_record([(cell.t + 1).to_string(), (cell.j + 1).to_string(), fmt(v)])?;
    }
    w.flush()?;
    Ok(())
}

/// 1-based `(t, j)` and the raw value of one row.
type Row = (usize, usize, String);

/// Parsed rows of a `t,j,value` file with the grid extent they imply.
fn read_rows<R: Read>(input: R) -> Result<(usize, usize, Vec<Row>)> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().map(str::trim).ne(HEADER) {
        return Err(Error::Parse(format!(
            "expected header `t,j,value`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    let (mut max_t, mut max_j) = (0, 0);
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let parse_index = |k: usize, name: &str| -> Result<usize> {
            let v: usize = record[k]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad {name} `{}`", line + 2, &record[k])))?;
            if v == 0 {
                return Err(Error::Parse(format!("row {}: {name} is 1-based", line + 2)));
            }
            Ok(v - 1)
        };
        let t = parse_index(0, "t")?;
        let j = parse_index(1, "j")?;
        max_t = max_t.max(t + 1);
        max_j = max_j.max(j + 1);
        rows.push((t, j, record[2].trim().to_string()));
    }
    Ok((max_t, max_j, rows))
}

fn fill_complete<V: Clone, F: Fn(&str) -> Result<V>>(
    rows: Vec<Row>,
    t_count: usize,
    n: usize,
    parse: F,
) -> Result<Grid<V>> {
    let mut cells: Vec<Option<V>> = vec![None; t_count * n];
    for (t, j, text) in rows {
        let slot = &mut cells[t * n + j];
        if slot.is_some() {
            return Err(Error::Parse(format!("duplicate cell t={}, j={}", t + 1, j + 1)));
        }
        *slot = Some(parse(&text)?);
    }
    let data = cells
        .into_iter()
        .enumerate()
        .map(|(k, v)| v.ok_or_else(|| Error::Parse(format!("missing cell t={}, j={}", k / n + 1, k % n + 1))))
        .collect::<Result<Vec<V>>>()?;
    Grid::from_vec(t_count, n, data)
}

pub fn write_hidden_states<W: Write>(x: &HiddenStateMatrix, out: W) -> Result<()> {
    write_grid(x.grid(), out, |s| (s + 1).to_string())
}

pub fn read_hidden_states<R: Read>(input: R, num_states: usize) -> Result<HiddenStateMatrix> {
    let (t_count, n, rows) = read_rows(input)?;
    let grid = fill_complete(rows, t_count, n, |text| {
        let s: usize = text
            .parse()
            .map_err(|_| Error::Parse(format!("bad state `{text}`")))?;
        if s == 0 {
            return Err(Error::Parse("states are 1-based".into()));
        }
        Ok(s - 1)
    })?;
    HiddenStateMatrix::new(num_states, grid)
}

pub fn write_observations<W: Write>(y: &ObservationMatrix, out: W) -> Result<()> {
    write_grid(y.grid(), out, |o| o.map(|o| o.to_string()).unwrap_or_default())
}

/// Reads observations into a `num_timepoints x num_individuals` grid;
/// cells absent from the file are missing.
pub fn read_observations<R: Read>(
    input: R,
    num_timepoints: usize,
    num_individuals: usize,
) -> Result<ObservationMatrix> {
    let (t_count, n, rows) = read_rows(input)?;
    if t_count > num_timepoints || n > num_individuals {
        return Err(Error::DimensionMismatch(format!(
            "observation file reaches t={t_count}, j={n}; grid is {num_timepoints}x{num_individuals}"
        )));
    }
    let mut y = ObservationMatrix::empty(num_timepoints, num_individuals);
    for (t, j, text) in rows {
        let obs = if text.is_empty() {
            None
        } else {
            Some(text.parse::<Observation>()?)
        };
        y.set(t, j, obs);
    }
    Ok(y)
}

pub fn write_uniforms<W: Write>(u: &UniformGrid, out: W) -> Result<()> {
    write_grid(u.grid(), out, |v| format!("{v:?}"))
}

pub fn read_uniforms<R: Read>(input: R) -> Result<UniformGrid> {
    let (t_count, n, rows) = read_rows(input)?;
    let grid = fill_complete(rows, t_count, n, |text| {
        text.parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad uniform value `{text}`")))
    })?;
    UniformGrid::new(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chmm::RecoveryCode;
    use proptest::prelude::*;

    #[test]
    fn hidden_states_are_written_one_based() {
        let x = HiddenStateMatrix::from_rows(3, &[vec![0, 1], vec![2, 1]]).unwrap();
        let mut buf = Vec::new();
        write_hidden_states(&x, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "t,j,value\n1,1,1\n1,2,2\n2,1,3\n2,2,2\n"
        );
        assert_eq!(read_hidden_states(buf.as_slice(), 3).unwrap(), x);
    }

    #[test]
    fn missing_observations_are_empty_fields() {
        let mut y = ObservationMatrix::empty(2, 2);
        y.set(0, 1, Some(Observation::Test(true)));
        y.set(
            1,
            0,
            Some(Observation::Recovery(RecoveryCode::SusceptibleOrInfective)),
        );
        let mut buf = Vec::new();
        write_observations(&y, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "t,j,value\n1,1,\n1,2,1\n2,1,S/I\n2,2,\n"
        );
        assert_eq!(read_observations(buf.as_slice(), 2, 2).unwrap(), y);
    }

    #[test]
    fn incomplete_hidden_state_files_are_rejected() {
        let text = "t,j,value\n1,1,1\n2,2,1\n";
        assert!(read_hidden_states(text.as_bytes(), 2).is_err());
        let text = "t,j,state\n1,1,1\n";
        assert!(read_hidden_states(text.as_bytes(), 2).is_err());
    }

    proptest! {
        #[test]
        fn uniform_grids_round_trip_exactly(values in proptest::collection::vec(1e-300f64..1.0, 6)) {
            let u = UniformGrid::new(Grid::from_vec(3, 2, values).unwrap()).unwrap();
            let mut buf = Vec::new();
            write_uniforms(&u, &mut buf).unwrap();
            prop_assert_eq!(read_uniforms(buf.as_slice()).unwrap(), u);
        }
    }
}
