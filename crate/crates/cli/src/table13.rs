//! Reference census of the 13# stage: every driving term of sum at most
//! 32 and length at most 16, as (gap, length, count) cells. The verify
//! suite rebuilds the stage from scratch and demands cell-for-cell
//! equality with this list.

pub const CELLS: &[(u64, usize, u64)] = &[
    (2, 1, 1485),
    (4, 1, 1485),
    (6, 1, 1690),
    (6, 2, 1280),
    (8, 1, 394),
    (8, 2, 902),
    (8, 3, 189),
    (10, 1, 438),
    (10, 2, 1164),
    (10, 3, 378),
    (12, 1, 188),
    (12, 2, 1276),
    (12, 3, 1314),
    (12, 4, 192),
    (14, 1, 58),
    (14, 2, 536),
    (14, 3, 900),
    (14, 4, 288),
    (16, 1, 12),
    (16, 2, 252),
    (16, 3, 750),
    (16, 4, 436),
    (16, 5, 35),
    (18, 1, 8),
    (18, 2, 256),
    (18, 3, 1224),
    (18, 4, 1272),
    (18, 5, 210),
    (20, 2, 24),
    (20, 3, 348),
    (20, 4, 960),
    (20, 5, 600),
    (20, 6, 48),
    (22, 1, 2),
    (22, 2, 48),
    (22, 3, 312),
    (22, 4, 784),
    (22, 5, 504),
    (24, 2, 20),
    (24, 3, 258),
    (24, 4, 928),
    (24, 5, 1260),
    (24, 6, 504),
    (26, 2, 2),
    (26, 3, 40),
    (26, 4, 322),
    (26, 5, 724),
    (26, 6, 448),
    (26, 7, 84),
    (28, 3, 36),
    (28, 4, 344),
    (28, 5, 794),
    (28, 6, 528),
    (28, 7, 80),
    (30, 3, 10),
    (30, 4, 194),
    (30, 5, 1066),
    (30, 6, 1784),
    (30, 7, 816),
    (30, 8, 90),
    (32, 4, 12),
    (32, 5, 200),
    (32, 6, 558),
    (32, 7, 523),
    (32, 8, 172),
    (32, 9, 20),
];
