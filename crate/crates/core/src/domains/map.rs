use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Contents of one map cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Free,
    Wall,
    /// Taxi pickup/dropoff landmark, numbered from 1.
    Landmark(u8),
    Coffee,
    Mail,
    Desk,
    Wood,
    Stone,
    Iron,
}

impl Cell {
    fn from_char(c: char) -> Option<Cell> {
        Some(match c {
            '.' => Cell::Free,
            '#' => Cell::Wall,
            'c' => Cell::Coffee,
            'm' => Cell::Mail,
            'd' => Cell::Desk,
            'w' => Cell::Wood,
            's' => Cell::Stone,
            'i' => Cell::Iron,
            '1'..='9' => Cell::Landmark(c as u8 - b'0'),
            _ => return None,
        })
    }

    fn to_char(self) -> char {
        match self {
            Cell::Free => '.',
            Cell::Wall => '#',
            Cell::Coffee => 'c',
            Cell::Mail => 'm',
            Cell::Desk => 'd',
            Cell::Wood => 'w',
            Cell::Stone => 's',
            Cell::Iron => 'i',
            Cell::Landmark(k) => (b'0' + k) as char,
        }
    }
}

/// Rectangular grid of cells.
///
/// Text format: one line per row, row `y` on line `y` (top line is `y = 0`),
/// column `x` at character `x`. Lines starting with `#` followed by a space
/// are comments. Legend:
///
/// | char | cell |
/// |------|------|
/// | `.`  | free |
/// | `#`  | wall |
/// | `1`-`9` | taxi landmark |
/// | `c`, `m`, `d` | coffee, mail, desk |
/// | `w`, `s`, `i` | wood, stone, iron |
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
}

impl GridMap {
    /// Map without walls.
    pub fn open(width: usize, height: usize) -> Result<GridMap> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMap("map must be at least 1x1".into()));
        }
        Ok(GridMap {
            width,
            height,
            cells: vec![Cell::Free; width * height],
        })
    }

    /// Open taxi map with `n` landmarks placed in corner order: top-left,
    /// top-right, bottom-left, bottom-right.
    pub fn taxi(width: usize, height: usize, n: usize) -> Result<GridMap> {
        let mut map = GridMap::open(width, height)?;
        let corners = [
            (0, 0),
            (width - 1, 0),
            (0, height - 1),
            (width - 1, height - 1),
        ];
        if n == 0 || n > 4 || width < 2 || height < 2 {
            return Err(Error::InvalidMap(
                "taxi map needs 1 to 4 landmarks and at least 2x2 cells".into(),
            ));
        }
        for (k, &(x, y)) in corners.iter().take(n).enumerate() {
            map.set(x, y, Cell::Landmark(k as u8 + 1));
        }
        Ok(map)
    }

    /// Four rooms split by a wall cross with one-cell hallways centred on
    /// each wall segment.
    pub fn four_rooms(width: usize, height: usize) -> Result<GridMap> {
        if width < 5 || height < 5 {
            return Err(Error::InvalidMap(
                "four rooms needs at least 5x5 cells".into(),
            ));
        }
        let mut map = GridMap::open(width, height)?;
        let (mx, my) = (width / 2, height / 2);
        for x in 0..width {
            map.set(x, my, Cell::Wall);
        }
        for y in 0..height {
            map.set(mx, y, Cell::Wall);
        }
        map.set(mx, my / 2, Cell::Free);
        map.set(mx, my + 1 + (height - my - 1) / 2, Cell::Free);
        map.set(mx / 2, my, Cell::Free);
        map.set(mx + 1 + (width - mx - 1) / 2, my, Cell::Free);
        Ok(map)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Cell {
        self.cells[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, cell: Cell) {
        self.cells[y * self.width + x] = cell;
    }

    /// Whether `(x, y)` is inside the map and not a wall.
    #[inline]
    pub fn passable(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.get(x as usize, y as usize) != Cell::Wall
    }

    pub fn free_cells(&self) -> Vec<(usize, usize)> {
        self.cells_where(|c| c != Cell::Wall)
    }

    pub fn cells_where(&self, pred: impl Fn(Cell) -> bool) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if pred(self.get(x, y)) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Landmark cells ordered by landmark number.
    pub fn landmarks(&self) -> Vec<(usize, usize)> {
        let mut marks: Vec<(u8, (usize, usize))> = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if let Cell::Landmark(k) = self.get(x, y) {
                    marks.push((k, (x, y)));
                }
            }
        }
        marks.sort();
        marks.into_iter().map(|(_, p)| p).collect()
    }

    /// Per-cell mask of the cells reachable from `(x, y)` by unit moves.
    pub fn reachable_from(&self, x: usize, y: usize) -> Vec<bool> {
        let mut seen = vec![false; self.cells.len()];
        if self.get(x, y) == Cell::Wall {
            return seen;
        }
        let mut queue = std::collections::VecDeque::from([(x, y)]);
        seen[y * self.width + x] = true;
        while let Some((cx, cy)) = queue.pop_front() {
            for (dx, dy) in [(0i64, -1i64), (0, 1), (1, 0), (-1, 0)] {
                let (nx, ny) = (cx as i64 + dx, cy as i64 + dy);
                if self.passable(nx, ny) {
                    let i = ny as usize * self.width + nx as usize;
                    if !seen[i] {
                        seen[i] = true;
                        queue.push_back((nx as usize, ny as usize));
                    }
                }
            }
        }
        seen
    }

    pub(crate) fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for y in 0..self.height {
            let row: String = (0..self.width).map(|x| self.get(x, y).to_char()).collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl FromStr for GridMap {
    type Err = Error;

    fn from_str(text: &str) -> Result<GridMap> {
        let mut rows: Vec<Vec<Cell>> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.is_empty() || line.starts_with("# ") {
                continue;
            }
            let row = line
                .chars()
                .map(|c| {
                    Cell::from_char(c)
                        .ok_or_else(|| Error::parse(i + 1, format!("unknown map character `{c}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::parse(i + 1, "map rows differ in length"));
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::InvalidMap("map has no rows".into()));
        }
        let width = rows[0].len();
        let height = rows.len();
        let mut seen = [false; 10];
        for &c in rows.iter().flatten() {
            if let Cell::Landmark(k) = c {
                if seen[k as usize] {
                    return Err(Error::InvalidMap(format!("landmark {k} appears twice")));
                }
                seen[k as usize] = true;
            }
        }
        Ok(GridMap {
            width,
            height,
            cells: rows.into_iter().flatten().collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let text = "# demo\n1.#.2\n..#..\n";
        let map: GridMap = text.parse().unwrap();
        assert_eq!((map.width(), map.height()), (5, 2));
        assert_eq!(map.get(2, 1), Cell::Wall);
        assert_eq!(map.landmarks(), vec![(0, 0), (4, 0)]);
        assert_eq!(map.to_string(), "1.#.2\n..#..\n");
        assert!(!map.passable(2, 0));
        assert!(!map.passable(-1, 0));
        assert!(!map.passable(0, 2));
    }

    #[test]
    fn rejects_ragged_and_unknown() {
        assert!("..\n...\n".parse::<GridMap>().is_err());
        assert!("..x\n".parse::<GridMap>().is_err());
        assert!("1.1\n".parse::<GridMap>().is_err());
        assert!("".parse::<GridMap>().is_err());
    }

    #[test]
    fn four_rooms_hallways_connect_everything() {
        let map = GridMap::four_rooms(33, 33).unwrap();
        let free = map.free_cells();
        let reach = map.reachable_from(0, 0);
        assert!(free.iter().all(|&(x, y)| reach[map.index(x, y)]));
        assert_eq!(map.get(16, 8), Cell::Free);
        assert_eq!(map.get(16, 25), Cell::Free);
        assert_eq!(map.get(16, 0), Cell::Wall);
    }
}
