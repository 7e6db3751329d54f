//! Regression targets for the built-in examples, as published (4-5 digit
//! prints; the tests compare entrywise at the tolerances these carry).

use ndarray::{array, Array2};

pub fn ex52_m_updated() -> Array2<f64> {
    0.1 * array![
        [9.0132, 0.6435, -0.0005],
        [0.6435, 9.0789, -0.5260],
        [-0.0005, -0.5260, 8.7177]
    ]
}

pub fn ex52_d_updated() -> Array2<f64> {
    array![
        [0., -1.6534, 2.8543],
        [1.6534, 0., -1.2119],
        [-2.8543, 1.2119, 0.]
    ]
}

pub fn ex52_k_updated() -> Array2<f64> {
    array![
        [15.1304, 2.0337, 0.2838],
        [2.0337, 9.5026, -0.3897],
        [0.2838, -0.3897, 9.2174]
    ]
}

pub fn ex51_z() -> Array2<f64> {
    array![
        [0.07448, -0.00328, 0.00042, -0.00065],
        [-0.00328, 0.06075, 0.00080, -0.00029],
        [0.00042, 0.00080, 0.02586, -0.01101],
        [-0.00065, -0.00029, -0.01101, 0.01727]
    ]
}

pub fn ex51_dm() -> Array2<f64> {
    1e-3 * array![
        [9.3095, -24.4279, 14.5031, -18.7431, 23.9416, -8.4718, 1.6675, 3.4774, -0.0641, -0.6650],
        [-24.4279, 67.9437, -41.9671, 57.9737, -67.6659, 19.4633, 0.7605, -20.6713, 4.7560, 0.0216],
        [14.5031, -41.9671, 28.1813, -43.3236, 43.8138, -10.7203, -5.1443, 23.2965, -7.8302, 1.9365],
        [-18.7431, 57.9737, -43.3236, 75.9119, -65.2624, 12.7806, 16.1761, -54.3748, 20.9451, -6.8164],
        [23.9416, -67.6659, 43.8138, -65.2624, 69.7849, -19.2399, -4.4682, 30.3068, -9.2572, 1.8447],
        [-8.4718, 19.4633, -10.7203, 12.7806, -19.2399, 10.4451, -4.9098, 3.0152, -2.2823, 1.3902],
        [1.6675, 0.7605, -5.1443, 16.1761, -4.4682, -4.9098, 11.1734, -24.1222, 10.8057, -4.2638],
        [3.4774, -20.6713, 23.2965, -54.3748, 30.3068, 3.0152, -24.1222, 60.4317, -25.8859, 9.8290],
        [-0.0641, 4.7560, -7.8302, 20.9451, -9.2572, -2.2823, 10.8057, -25.8859, 11.4607, -4.4693],
        [-0.6650, 0.0216, 1.9365, -6.8164, 1.8447, 1.3902, -4.2638, 9.8290, -4.4693, 1.8039]
    ]
}

pub fn ex51_dd() -> Array2<f64> {
    array![
        [0.1225, -0.2216, 0.2315, -0.4845, 0.1814, -0.0467, -0.2684, 0.4364, -0.2122, 0.0689],
        [-0.2216, 0.1724, -0.3101, 0.7276, -0.0057, 0.0788, 0.5863, -0.6878, 0.4014, -0.1192],
        [0.2315, -0.3101, 0.2840, -0.5046, 0.2195, -0.2047, -0.2389, 0.2513, -0.1695, 0.0314],
        [-0.4845, 0.7276, -0.5046, 0.7066, -0.6532, 0.6396, 0.0267, 0.0979, 0.0462, 0.0496],
        [0.1814, -0.0057, 0.2195, -0.6532, -0.0649, -0.1825, -0.5081, 0.6043, -0.3935, 0.1195],
        [-0.0467, 0.0788, -0.2047, 0.6396, -0.1825, 0.0679, 0.3234, -0.7218, 0.3438, -0.1373],
        [-0.2684, 0.5863, -0.2389, 0.0267, -0.5081, 0.3234, -0.3182, 0.5763, -0.2716, 0.1421],
        [0.4364, -0.6878, 0.2513, 0.0979, 0.6043, -0.7218, 0.5763, -1.1491, 0.4605, -0.2451],
        [-0.2122, 0.4014, -0.1695, 0.0462, -0.3935, 0.3438, -0.2716, 0.4605, -0.1955, 0.1051],
        [0.0689, -0.1192, 0.0314, 0.0496, 0.1195, -0.1373, 0.1421, -0.2451, 0.1051, -0.0505]
    ]
}

pub fn ex51_dk() -> Array2<f64> {
    array![
        [28.0577, -81.5942, 52.7467, -81.4589, 88.5228, -28.0835, -1.6524, 38.1178, -11.1266, 2.8698],
        [-81.5942, 241.9383, -160.7575, 255.6535, -262.6384, 75.0079, 19.1931, -137.2175, 43.9081, -12.5844],
        [52.7467, -160.7575, 112.0746, -186.2415, 175.5596, -42.0997, -27.4937, 117.4612, -41.1852, 12.9837],
        [-81.4589, 255.6535, -186.2415, 323.4317, -283.4432, 57.5522, 64.8610, -228.1801, 84.4493, -27.9849],
        [88.5228, -262.6384, 175.5596, -283.4432, 290.1658, -85.8764, -19.0487, 152.9206, -49.7268, 14.6872],
        [-28.0835, 75.0079, -42.0997, 57.5522, -85.8764, 42.9652, -22.8915, -0.1737, -5.3397, 3.0183],
        [-1.6524, 19.1931, -27.4937, 64.8610, -19.0487, -22.8915, 49.3152, -88.8186, 38.7107, -14.2052],
        [38.1178, -137.2175, 117.4612, -228.1801, 152.9206, -0.1737, -88.8186, 214.3873, -87.0151, 30.7811],
        [-11.1266, 43.9081, -41.1852, 84.4493, -49.7268, -5.3397, 38.7107, -87.0151, 36.2412, -13.0667],
        [2.8698, -12.5844, 12.9837, -27.9849, 14.6872, 3.0183, -14.2052, 30.7811, -13.0667, 4.7860]
    ]
}
