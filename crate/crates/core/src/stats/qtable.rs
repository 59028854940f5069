//! Upper critical values of the studentized range distribution,
//! `q(α; k, df)` for k = 2..=10 groups, rounded to three decimals.
pub(super) const DFS: [f64; 30] = [
    5.0,
    6.0,
    7.0,
    8.0,
    9.0,
    10.0,
    11.0,
    12.0,
    13.0,
    14.0,
    15.0,
    16.0,
    17.0,
    18.0,
    19.0,
    20.0,
    21.0,
    22.0,
    23.0,
    24.0,
    25.0,
    26.0,
    27.0,
    28.0,
    29.0,
    30.0,
    40.0,
    60.0,
    120.0,
    f64::INFINITY,
];

pub(super) const Q_05: [[f64; 9]; 30] = [
    [
        3.635, 4.602, 5.218, 5.673, 6.033, 6.330, 6.582, 6.801, 6.995,
    ], // df 5
    [
        3.460, 4.339, 4.896, 5.305, 5.628, 5.895, 6.122, 6.319, 6.493,
    ], // df 6
    [
        3.344, 4.165, 4.681, 5.060, 5.359, 5.606, 5.815, 5.997, 6.158,
    ], // df 7
    [
        3.261, 4.041, 4.529, 4.886, 5.167, 5.399, 5.596, 5.767, 5.918,
    ], // df 8
    [
        3.199, 3.948, 4.415, 4.755, 5.024, 5.244, 5.432, 5.595, 5.738,
    ], // df 9
    [
        3.151, 3.877, 4.327, 4.654, 4.912, 5.124, 5.304, 5.460, 5.598,
    ], // df 10
    [
        3.113, 3.820, 4.256, 4.574, 4.823, 5.028, 5.202, 5.353, 5.486,
    ], // df 11
    [
        3.081, 3.773, 4.199, 4.508, 4.750, 4.950, 5.119, 5.265, 5.395,
    ], // df 12
    [
        3.055, 3.734, 4.151, 4.453, 4.690, 4.884, 5.049, 5.192, 5.318,
    ], // df 13
    [
        3.033, 3.701, 4.111, 4.407, 4.639, 4.829, 4.990, 5.130, 5.253,
    ], // df 14
    [
        3.014, 3.673, 4.076, 4.367, 4.595, 4.782, 4.940, 5.077, 5.198,
    ], // df 15
    [
        2.998, 3.649, 4.046, 4.333, 4.557, 4.741, 4.896, 5.031, 5.150,
    ], // df 16
    [
        2.984, 3.628, 4.020, 4.303, 4.524, 4.705, 4.858, 4.991, 5.108,
    ], // df 17
    [
        2.971, 3.609, 3.997, 4.276, 4.494, 4.673, 4.824, 4.955, 5.071,
    ], // df 18
    [
        2.960, 3.593, 3.977, 4.253, 4.468, 4.645, 4.794, 4.924, 5.037,
    ], // df 19
    [
        2.950, 3.578, 3.958, 4.232, 4.445, 4.620, 4.768, 4.895, 5.008,
    ], // df 20
    [
        2.941, 3.565, 3.942, 4.213, 4.424, 4.597, 4.743, 4.870, 4.981,
    ], // df 21
    [
        2.933, 3.553, 3.927, 4.196, 4.405, 4.577, 4.722, 4.847, 4.957,
    ], // df 22
    [
        2.926, 3.542, 3.914, 4.180, 4.388, 4.558, 4.702, 4.826, 4.935,
    ], // df 23
    [
        2.919, 3.532, 3.901, 4.166, 4.373, 4.541, 4.684, 4.807, 4.915,
    ], // df 24
    [
        2.913, 3.523, 3.890, 4.153, 4.358, 4.526, 4.667, 4.789, 4.897,
    ], // df 25
    [
        2.907, 3.514, 3.880, 4.141, 4.345, 4.511, 4.652, 4.773, 4.880,
    ], // df 26
    [
        2.902, 3.506, 3.870, 4.130, 4.333, 4.498, 4.638, 4.758, 4.864,
    ], // df 27
    [
        2.897, 3.499, 3.861, 4.120, 4.322, 4.486, 4.625, 4.745, 4.850,
    ], // df 28
    [
        2.892, 3.493, 3.853, 4.111, 4.311, 4.475, 4.613, 4.732, 4.837,
    ], // df 29
    [
        2.888, 3.486, 3.845, 4.102, 4.301, 4.464, 4.601, 4.720, 4.824,
    ], // df 30
    [
        2.858, 3.442, 3.791, 4.039, 4.232, 4.388, 4.521, 4.634, 4.735,
    ], // df 40
    [
        2.829, 3.399, 3.737, 3.977, 4.163, 4.314, 4.441, 4.550, 4.646,
    ], // df 60
    [
        2.800, 3.356, 3.685, 3.917, 4.096, 4.241, 4.363, 4.468, 4.560,
    ], // df 120
    [
        2.772, 3.314, 3.633, 3.858, 4.030, 4.170, 4.286, 4.387, 4.474,
    ], // df inf
];

pub(super) const Q_01: [[f64; 9]; 30] = [
    [
        5.702, 6.976, 7.804, 8.421, 8.913, 9.321, 9.669, 9.971, 10.239,
    ], // df 5
    [
        5.243, 6.331, 7.033, 7.556, 7.972, 8.318, 8.612, 8.869, 9.097,
    ], // df 6
    [
        4.949, 5.919, 6.542, 7.005, 7.373, 7.678, 7.939, 8.166, 8.367,
    ], // df 7
    [
        4.745, 5.635, 6.204, 6.625, 6.959, 7.237, 7.474, 7.680, 7.863,
    ], // df 8
    [
        4.596, 5.428, 5.957, 6.347, 6.657, 6.915, 7.134, 7.325, 7.494,
    ], // df 9
    [
        4.482, 5.270, 5.769, 6.136, 6.428, 6.669, 6.875, 7.054, 7.213,
    ], // df 10
    [
        4.392, 5.146, 5.621, 5.970, 6.247, 6.476, 6.671, 6.841, 6.992,
    ], // df 11
    [
        4.320, 5.046, 5.502, 5.836, 6.101, 6.320, 6.507, 6.670, 6.814,
    ], // df 12
    [
        4.260, 4.964, 5.404, 5.726, 5.981, 6.192, 6.372, 6.528, 6.666,
    ], // df 13
    [
        4.210, 4.895, 5.322, 5.634, 5.881, 6.085, 6.258, 6.409, 6.543,
    ], // df 14
    [
        4.167, 4.836, 5.252, 5.556, 5.796, 5.994, 6.162, 6.309, 6.438,
    ], // df 15
    [
        4.131, 4.786, 5.192, 5.489, 5.722, 5.915, 6.079, 6.222, 6.348,
    ], // df 16
    [
        4.099, 4.742, 5.140, 5.430, 5.659, 5.847, 6.007, 6.147, 6.270,
    ], // df 17
    [
        4.071, 4.703, 5.094, 5.379, 5.603, 5.787, 5.944, 6.081, 6.201,
    ], // df 18
    [
        4.046, 4.669, 5.054, 5.334, 5.553, 5.735, 5.889, 6.022, 6.141,
    ], // df 19
    [
        4.024, 4.639, 5.018, 5.293, 5.510, 5.688, 5.839, 5.970, 6.086,
    ], // df 20
    [
        4.004, 4.612, 4.986, 5.257, 5.470, 5.646, 5.794, 5.924, 6.038,
    ], // df 21
    [
        3.986, 4.588, 4.957, 5.225, 5.435, 5.608, 5.754, 5.882, 5.994,
    ], // df 22
    [
        3.970, 4.566, 4.931, 5.195, 5.403, 5.573, 5.718, 5.844, 5.955,
    ], // df 23
    [
        3.955, 4.546, 4.907, 5.168, 5.373, 5.542, 5.685, 5.809, 5.919,
    ], // df 24
    [
        3.942, 4.527, 4.885, 5.144, 5.347, 5.513, 5.655, 5.778, 5.886,
    ], // df 25
    [
        3.930, 4.510, 4.865, 5.121, 5.322, 5.487, 5.627, 5.749, 5.856,
    ], // df 26
    [
        3.918, 4.495, 4.847, 5.101, 5.300, 5.463, 5.602, 5.722, 5.828,
    ], // df 27
    [
        3.908, 4.481, 4.830, 5.082, 5.279, 5.441, 5.578, 5.697, 5.802,
    ], // df 28
    [
        3.898, 4.467, 4.814, 5.064, 5.260, 5.420, 5.556, 5.674, 5.778,
    ], // df 29
    [
        3.889, 4.455, 4.799, 5.048, 5.242, 5.401, 5.536, 5.653, 5.756,
    ], // df 30
    [
        3.825, 4.367, 4.695, 4.931, 5.114, 5.265, 5.392, 5.502, 5.599,
    ], // df 40
    [
        3.762, 4.282, 4.594, 4.818, 4.991, 5.133, 5.253, 5.356, 5.447,
    ], // df 60
    [
        3.702, 4.200, 4.497, 4.709, 4.872, 5.005, 5.118, 5.214, 5.299,
    ], // df 120
    [
        3.643, 4.120, 4.403, 4.603, 4.757, 4.882, 4.987, 5.078, 5.157,
    ], // df inf
];

pub(super) const Q_001: [[f64; 9]; 30] = [
    [
        9.714, 11.672, 12.962, 13.930, 14.704, 15.348, 15.898, 16.378, 16.804,
    ], // df 5
    [
        8.427, 9.960, 10.965, 11.719, 12.323, 12.825, 13.256, 13.631, 13.965,
    ], // df 6
    [
        7.648, 8.930, 9.768, 10.395, 10.897, 11.316, 11.675, 11.988, 12.266,
    ], // df 7
    [
        7.129, 8.250, 8.977, 9.522, 9.958, 10.321, 10.632, 10.904, 11.145,
    ], // df 8
    [
        6.761, 7.768, 8.419, 8.906, 9.295, 9.619, 9.896, 10.139, 10.355,
    ], // df 9
    [
        6.487, 7.411, 8.006, 8.449, 8.804, 9.099, 9.352, 9.573, 9.769,
    ], // df 10
    [
        6.275, 7.135, 7.687, 8.098, 8.426, 8.699, 8.933, 9.137, 9.319,
    ], // df 11
    [
        6.106, 6.917, 7.435, 7.820, 8.127, 8.382, 8.601, 8.792, 8.962,
    ], // df 12
    [
        5.969, 6.740, 7.231, 7.595, 7.885, 8.126, 8.332, 8.513, 8.673,
    ], // df 13
    [
        5.855, 6.593, 7.062, 7.409, 7.685, 7.914, 8.110, 8.282, 8.434,
    ], // df 14
    [
        5.760, 6.470, 6.920, 7.252, 7.517, 7.736, 7.924, 8.088, 8.234,
    ], // df 15
    [
        5.678, 6.365, 6.799, 7.119, 7.374, 7.585, 7.765, 7.923, 8.063,
    ], // df 16
    [
        5.608, 6.274, 6.695, 7.004, 7.250, 7.454, 7.629, 7.781, 7.916,
    ], // df 17
    [
        5.546, 6.195, 6.604, 6.905, 7.143, 7.341, 7.510, 7.657, 7.788,
    ], // df 18
    [
        5.492, 6.126, 6.524, 6.817, 7.049, 7.241, 7.405, 7.549, 7.676,
    ], // df 19
    [
        5.444, 6.065, 6.454, 6.740, 6.966, 7.153, 7.313, 7.453, 7.576,
    ], // df 20
    [
        5.401, 6.010, 6.391, 6.671, 6.892, 7.075, 7.231, 7.367, 7.488,
    ], // df 21
    [
        5.363, 5.961, 6.335, 6.609, 6.825, 7.004, 7.157, 7.291, 7.409,
    ], // df 22
    [
        5.328, 5.917, 6.284, 6.553, 6.765, 6.941, 7.091, 7.221, 7.337,
    ], // df 23
    [
        5.297, 5.877, 6.238, 6.502, 6.711, 6.884, 7.031, 7.159, 7.272,
    ], // df 24
    [
        5.268, 5.840, 6.196, 6.456, 6.662, 6.831, 6.976, 7.102, 7.213,
    ], // df 25
    [
        5.242, 5.807, 6.158, 6.414, 6.617, 6.784, 6.926, 7.050, 7.160,
    ], // df 26
    [
        5.218, 5.776, 6.123, 6.376, 6.575, 6.740, 6.880, 7.002, 7.110,
    ], // df 27
    [
        5.196, 5.748, 6.091, 6.340, 6.537, 6.700, 6.838, 6.958, 7.065,
    ], // df 28
    [
        5.175, 5.722, 6.061, 6.307, 6.502, 6.662, 6.799, 6.918, 7.023,
    ], // df 29
    [
        5.156, 5.698, 6.033, 6.277, 6.469, 6.628, 6.763, 6.880, 6.984,
    ], // df 30
    [
        5.022, 5.527, 5.838, 6.063, 6.240, 6.385, 6.509, 6.616, 6.710,
    ], // df 40
    [
        4.893, 5.365, 5.653, 5.860, 6.022, 6.155, 6.268, 6.365, 6.451,
    ], // df 60
    [
        4.771, 5.211, 5.476, 5.667, 5.815, 5.937, 6.039, 6.128, 6.206,
    ], // df 120
    [
        4.654, 5.063, 5.309, 5.484, 5.619, 5.730, 5.823, 5.903, 5.973,
    ], // df inf
];
