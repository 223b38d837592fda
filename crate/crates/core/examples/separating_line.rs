//! Finds a strictly separating line between a segment and a rectangle, or
//! reports that the segment touches it.
//!
//!     cargo run --example separating_line [x0 y0 x1 y1]

use smtnav::geometry::{find_separating_line, segment_intersects_rect, Point};
use smtnav::gridmap::ObstacleRect;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rect = ObstacleRect::new(2.0, 2.0, 4.0, 3.0)?;
    let given: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let segments = if given.len() == 4 {
        vec![(Point::new(given[0], given[1]), Point::new(given[2], given[3]))]
    } else {
        vec![
            (Point::new(0.0, 0.0), Point::new(6.0, 1.0)),
            (Point::new(0.0, 0.0), Point::new(6.0, 5.0)),
            (Point::new(1.0, 4.0), Point::new(5.0, 3.5)),
            (Point::new(4.0, 0.0), Point::new(4.0, 2.0)),
        ]
    };
    println!("rectangle ({}, {}) - ({}, {})", rect.x_bl, rect.y_bl, rect.x_tr, rect.y_tr);
    for (p, q) in segments {
        print!("segment ({}, {}) -> ({}, {}): ", p.x, p.y, q.x, q.y);
        match find_separating_line(p, q, &rect) {
            Some(l) => {
                let side = |pt: Point| if l.eval(pt) > 0.0 { "+" } else { "-" };
                let corners: String = rect.corners().iter().map(|&c| side(c)).collect();
                println!(
                    "{:.3} x + {:.3} y + {:.3} = 0 (segment {}{}, corners {corners})",
                    l.a,
                    l.b,
                    l.c,
                    side(p),
                    side(q)
                );
            }
            None => {
                assert!(segment_intersects_rect(p, q, &rect));
                println!("touches the rectangle, no separating line");
            }
        }
    }
    Ok(())
}
