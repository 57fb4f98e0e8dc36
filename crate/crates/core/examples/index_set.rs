//! Build a layered index set from a flag mask on a 5x5 grid and move data
//! between the full and the reduced vector.

use setnewton::{GridMap, LayeredIndexSet};

fn main() -> setnewton::Result<()> {
    let grid = GridMap::plane(5, 5)?;
    // (i, j), 1-based, row j runs along i
    let members = [
        (1, 1),
        (2, 1),
        (1, 2),
        (2, 2),
        (3, 2),
        (4, 2),
        (3, 3),
        (4, 3),
        (2, 5),
        (3, 5),
        (4, 5),
    ];
    let mut flags = vec![false; grid.len()];
    for (i, j) in members {
        flags[grid.index(i - 1, j - 1, 0)] = true;
    }
    let set = LayeredIndexSet::build_from_flags(&flags, grid)?;

    println!("set_vec (1-based): {:?}", set.set_vec_one_based());
    for row in set.rows() {
        let cols: Vec<usize> = row.cols.iter().map(|c| c + 1).collect();
        println!("row {}: columns {:?}", row.j + 1, cols);
    }

    let x: Vec<f64> = (1..=25).map(f64::from).collect();
    let reduced = set.gather(&x)?;
    println!("gathered: {reduced:?}");

    let mut y = x.clone();
    set.scatter_update(&mut y, &vec![1.0; set.len()], 0.5)?;
    println!("after x[S] += 0.5: {y:?}");
    println!("trace line: {}", set.trace_line(1));
    Ok(())
}
