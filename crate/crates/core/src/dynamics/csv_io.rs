//! CSV rendering of trajectories: `tau, coord_1..k, vel_1..k [, J_1..k, DJ_1..k]`,
//! every value with 17 significant digits.

use std::io::{Read, Write};

use super::geodesic::Trajectory;
use super::jacobi::JacobiTrajectory;
use crate::error::{GeoError, Result};
use crate::manifold::{christoffel_at, ManifoldSpec, Point};

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn header(k: usize, jacobi: bool) -> Vec<String> {
    let mut h = vec!["tau".to_string()];
    h.extend((1..=k).map(|i| format!("coord_{i}")));
    h.extend((1..=k).map(|i| format!("vel_{i}")));
    if jacobi {
        h.extend((1..=k).map(|i| format!("J_{i}")));
        h.extend((1..=k).map(|i| format!("DJ_{i}")));
    }
    h
}

fn write_rows<W: Write>(w: W, traj: &Trajectory, extra: Option<&JacobiTrajectory>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header(traj.dim(), extra.is_some()))?;
    for n in 0..traj.len() {
        let mut row = vec![fmt(traj.tau[n])];
        row.extend(traj.points[n].coords().iter().map(|&x| fmt(x)));
        row.extend(traj.velocities[n].iter().map(|&x| fmt(x)));
        if let Some(j) = extra {
            row.extend(j.j[n].iter().map(|&x| fmt(x)));
            row.extend(j.dj[n].iter().map(|&x| fmt(x)));
        }
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| GeoError::Csv(e.to_string()))?;
    Ok(())
}

pub fn write_trajectory_csv<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    write_rows(w, traj, None)
}

pub fn write_jacobi_csv<W: Write>(w: W, jac: &JacobiTrajectory) -> Result<()> {
    write_rows(w, &jac.base, Some(jac))
}

fn read_table<R: Read>(r: R, blocks: usize) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut rd = csv::Reader::from_reader(r);
    let width = rd.headers()?.len();
    if width < 1 || (width - 1) % blocks != 0 {
        return Err(GeoError::Csv(format!("unexpected column count {width}")));
    }
    let k = (width - 1) / blocks;
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| GeoError::Csv(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((k, rows))
}

fn trajectory_from_rows(name: &str, k: usize, rows: &[Vec<f64>]) -> Result<Trajectory> {
    let tau: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let points = rows.iter().map(|r| Point::from_slice(&r[1..=k])).collect::<Result<Vec<_>>>()?;
    let velocities = rows.iter().map(|r| r[k + 1..2 * k + 1].to_vec()).collect();
    let step = if tau.len() > 1 { tau[1] - tau[0] } else { 0.0 };
    Ok(Trajectory {
        spec_name: name.to_string(),
        tau,
        points,
        velocities,
        method: "csv".into(),
        step,
    })
}

pub fn read_trajectory_csv<R: Read>(r: R, name: &str) -> Result<Trajectory> {
    let (k, rows) = read_table(r, 2)?;
    trajectory_from_rows(name, k, &rows)
}

/// Reads a Jacobi CSV; the coordinate derivative is rebuilt from `DJ` with the connection of `spec`.
pub fn read_jacobi_csv<R: Read>(r: R, spec: &ManifoldSpec) -> Result<JacobiTrajectory> {
    let (k, rows) = read_table(r, 4)?;
    let base = trajectory_from_rows(spec.name(), k, &rows)?;
    let j: Vec<Vec<f64>> = rows.iter().map(|r| r[2 * k + 1..3 * k + 1].to_vec()).collect();
    let dj: Vec<Vec<f64>> = rows.iter().map(|r| r[3 * k + 1..].to_vec()).collect();
    let jdot = base
        .points
        .iter()
        .zip(&base.velocities)
        .zip(j.iter().zip(&dj))
        .map(|((p, v), (jj, d))| {
            let g = christoffel_at(spec, p)?.contract(jj, v);
            Ok(d.iter().zip(g).map(|(a, b)| a - b).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(JacobiTrajectory { base, j, jdot, dj })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate_geodesic, integrate_jacobi};
    use crate::models::{gauss_geodesic, gauss_manifold, GaussGeodesicParams};

    #[test]
    fn round_trip_is_bit_exact() {
        let params = GaussGeodesicParams::new(2.0, 1.0, 0.3).unwrap();
        let spec = gauss_manifold(0.3).unwrap();
        let (p0, v0) = gauss_geodesic(&params, 0.0).unwrap();
        let traj = integrate_geodesic(&spec, &p0, &v0, 1.0, 0.01).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let back = read_trajectory_csv(buf.as_slice(), spec.name()).unwrap();
        assert_eq!(back.tau, traj.tau);
        assert_eq!(back.points, traj.points);
        assert_eq!(back.velocities, traj.velocities);

        let jac = integrate_jacobi(&spec, &traj, &[0.1, 0.2, 0.3], &[0.0, 0.1, -0.1]).unwrap();
        let mut buf = Vec::new();
        write_jacobi_csv(&mut buf, &jac).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("tau,coord_1,coord_2,coord_3,vel_1,vel_2,vel_3,J_1,J_2,J_3,DJ_1"));
        let back = read_jacobi_csv(buf.as_slice(), &spec).unwrap();
        assert_eq!(back.j, jac.j);
        assert_eq!(back.dj, jac.dj);
    }
}
