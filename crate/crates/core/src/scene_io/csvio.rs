use std::io::{Read, Write};

use num_complex::Complex64;

use crate::discrete::{ChargeSolution, FieldFlag, FieldGrid};
use crate::particle::BoundaryCondition;
use crate::{CVec3, Error, Point3, Result};

pub const FIELD_HEADER: [&str; 8] = ["x", "y", "z", "re_u", "im_u", "re_u0", "im_u0", "flag"];
pub const CHARGE_HEADER: [&str; 3] = ["index", "re_q", "im_q"];
pub const MOMENT_HEADER: [&str; 12] = [
    "index", "bc", "re_q", "im_q", "re_u", "im_u", "re_dux", "im_dux", "re_duy", "im_duy", "re_duz", "im_duz",
];

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("line {line}: `{s}` is not a number")))
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::InvalidInput(format!(
            "unexpected header `{}`, expected `{}`",
            header.iter().collect::<Vec<_>>().join(","),
            expected.join(",")
        )));
    }
    Ok(())
}

pub fn write_field(out: impl Write, field: &FieldGrid) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIELD_HEADER)?;
    for i in 0..field.len() {
        let (p, u, u0) = (field.points[i], field.u[i], field.u0[i]);
        w.write_record([
            num(p.x),
            num(p.y),
            num(p.z),
            num(u.re),
            num(u.im),
            num(u0.re),
            num(u0.im),
            field.flags[i].code().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field(input: impl Read) -> Result<FieldGrid> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &FIELD_HEADER)?;
    let mut grid = FieldGrid {
        points: Vec::new(),
        u: Vec::new(),
        u0: Vec::new(),
        flags: Vec::new(),
    };
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = n + 2;
        let v = (0..7).map(|i| parse_f64(&rec[i], line)).collect::<Result<Vec<f64>>>()?;
        let code: u8 = rec[7]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("line {line}: bad flag `{}`", &rec[7])))?;
        grid.points.push(Point3::new(v[0], v[1], v[2]));
        grid.u.push(Complex64::new(v[3], v[4]));
        grid.u0.push(Complex64::new(v[5], v[6]));
        grid.flags.push(FieldFlag::from_code(code)?);
    }
    Ok(grid)
}

/// One particle's unknowns as stored in a charges file.
#[derive(Debug, Clone, PartialEq)]
pub enum ChargeRow {
    Dirichlet { index: usize, q: Complex64 },
    Neumann { index: usize, u: Complex64, grad: CVec3 },
}

/// Writes `index,re_q,im_q` when every particle is Dirichlet, and the
/// wider moments layout otherwise (unused columns left empty).
pub fn write_charges(out: impl Write, solution: &ChargeSolution) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mixed = (0..solution.len()).any(|m| solution.bc(m) == BoundaryCondition::Neumann);
    if !mixed {
        w.write_record(CHARGE_HEADER)?;
        for m in 0..solution.len() {
            let q = solution.block(m)[0];
            w.write_record([m.to_string(), num(q.re), num(q.im)])?;
        }
    } else {
        w.write_record(MOMENT_HEADER)?;
        for m in 0..solution.len() {
            let mut rec = vec![m.to_string(), solution.bc(m).to_string()];
            match solution.bc(m) {
                BoundaryCondition::Dirichlet => {
                    let q = solution.block(m)[0];
                    rec.extend([num(q.re), num(q.im)]);
                    rec.extend(std::iter::repeat(String::new()).take(8));
                }
                BoundaryCondition::Neumann => {
                    rec.extend([String::new(), String::new()]);
                    for z in solution.block(m) {
                        rec.extend([num(z.re), num(z.im)]);
                    }
                }
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_charges(input: impl Read) -> Result<Vec<ChargeRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let moments = header.len() == MOMENT_HEADER.len();
    check_header(&mut rdr, if moments { &MOMENT_HEADER } else { &CHARGE_HEADER })?;
    let mut rows = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = n + 2;
        let index: usize = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("line {line}: bad index `{}`", &rec[0])))?;
        if index != rows.len() {
            return Err(Error::InvalidInput(format!("line {line}: index {index} out of order")));
        }
        let c = |i: usize| -> Result<Complex64> {
            Ok(Complex64::new(parse_f64(&rec[i], line)?, parse_f64(&rec[i + 1], line)?))
        };
        if !moments {
            rows.push(ChargeRow::Dirichlet { index, q: c(1)? });
            continue;
        }
        let bc: BoundaryCondition = rec[1].parse()?;
        rows.push(match bc {
            BoundaryCondition::Dirichlet => ChargeRow::Dirichlet { index, q: c(2)? },
            BoundaryCondition::Neumann => ChargeRow::Neumann {
                index,
                u: c(4)?,
                grad: [c(6)?, c(8)?, c(10)?],
            },
        });
    }
    Ok(rows)
}
