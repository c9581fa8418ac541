"""Benchmark parameter sets for the bundled worked examples.

``example1`` is a 3-state/2-action sampling-and-measurement-control
model, ``example2`` a 10-state/2-action model, ``example3`` an
8-state/8-action model and ``example4`` a parametric 3-state family;
they back the myopic-bound benchmark tables.
"""

from __future__ import annotations

import numpy as np

from .model import PomdpModel

EXAMPLE1_COSTS = np.array([
    [1.0000, 1.5002],
    [1.5045, 1.0000],
    [1.8341, 1.0000],
])

EXAMPLE1_P2 = np.array([
    [1.0000, 0.0000, 0.0000],
    [0.4677, 0.4149, 0.1174],
    [0.3302, 0.5220, 0.1478],
])

EXAMPLE1_B1 = np.array([
    [0.6373, 0.3405, 0.0222],
    [0.3118, 0.6399, 0.0483],
    [0.0422, 0.8844, 0.0734],
])

EXAMPLE1_B2 = np.array([
    [0.5927, 0.3829, 0.0244],
    [0.4986, 0.4625, 0.0389],
    [0.1395, 0.7900, 0.0705],
])


def _rows(M: np.ndarray) -> np.ndarray:
    # benchmark matrices are printed to four decimals; renormalize rows
    M = np.asarray(M, dtype=float)
    return M / M.sum(axis=1, keepdims=True)


def example1(rho: float = 0.4) -> PomdpModel:
    P2 = _rows(EXAMPLE1_P2)
    P1 = P2 @ P2
    return PomdpModel(
        transitions=np.stack([P1, P2]),
        observations=np.stack([_rows(EXAMPLE1_B1), _rows(EXAMPLE1_B2)]),
        costs=EXAMPLE1_COSTS,
        discount=rho,
    )


EXAMPLE2_B = np.array([
  [0.0297, 0.1334, 0.1731, 0.0482, 0.1329, 0.1095, 0.0926, 0.0348, 0.1067, 0.1391],
  [0.0030, 0.0271, 0.0558, 0.0228, 0.0845, 0.0923, 0.1029, 0.0511, 0.2001, 0.3604],
  [0.0003, 0.0054, 0.0169, 0.0094, 0.0444, 0.0599, 0.0812, 0.0487, 0.2263, 0.5075],
  [0.0000, 0.0011, 0.0051, 0.0038, 0.0225, 0.0368, 0.0593, 0.0418, 0.2250, 0.6046],
  [0.0000, 0.0002, 0.0015, 0.0015, 0.0113, 0.0223, 0.0423, 0.0345, 0.2133, 0.6731],
  [0.0000, 0.0000, 0.0005, 0.0006, 0.0056, 0.0134, 0.0298, 0.0281, 0.1977, 0.7243],
  [0.0000, 0.0000, 0.0001, 0.0002, 0.0028, 0.0081, 0.0210, 0.0227, 0.1813, 0.7638],
  [0.0000, 0.0000, 0.0000, 0.0001, 0.0014, 0.0048, 0.0147, 0.0183, 0.1651, 0.7956],
  [0.0000, 0.0000, 0.0000, 0.0000, 0.0007, 0.0029, 0.0103, 0.0147, 0.1497, 0.8217],
  [0.0000, 0.0000, 0.0000, 0.0000, 0.0004, 0.0017, 0.0072, 0.0118, 0.1355, 0.8434],
])

EXAMPLE2_P1 = np.array([
  [0.9496, 0.0056, 0.0056, 0.0056, 0.0056, 0.0056, 0.0056, 0.0056, 0.0056, 0.0056],
  [0.9023, 0.0081, 0.0112, 0.0112, 0.0112, 0.0112, 0.0112, 0.0112, 0.0112, 0.0112],
  [0.8574, 0.0097, 0.0166, 0.0166, 0.0166, 0.0166, 0.0166, 0.0166, 0.0166, 0.0167],
  [0.8145, 0.0109, 0.0218, 0.0218, 0.0218, 0.0218, 0.0218, 0.0218, 0.0218, 0.0220],
  [0.7737, 0.0119, 0.0268, 0.0268, 0.0268, 0.0268, 0.0268, 0.0268, 0.0268, 0.0268],
  [0.7351, 0.0126, 0.0315, 0.0315, 0.0315, 0.0315, 0.0315, 0.0315, 0.0315, 0.0318],
  [0.6981, 0.0131, 0.0361, 0.0361, 0.0361, 0.0361, 0.0361, 0.0361, 0.0361, 0.0361],
  [0.6632, 0.0136, 0.0404, 0.0404, 0.0404, 0.0404, 0.0404, 0.0404, 0.0404, 0.0404],
  [0.6301, 0.0139, 0.0445, 0.0445, 0.0445, 0.0445, 0.0445, 0.0445, 0.0445, 0.0445],
  [0.5987, 0.0141, 0.0484, 0.0484, 0.0484, 0.0484, 0.0484, 0.0484, 0.0484, 0.0484],
])

EXAMPLE2_P2 = np.array([
  [0.5688, 0.0143, 0.0521, 0.0521, 0.0521, 0.0521, 0.0521, 0.0521, 0.0521, 0.0522],
  [0.5400, 0.0144, 0.0557, 0.0557, 0.0557, 0.0557, 0.0557, 0.0557, 0.0557, 0.0557],
  [0.5133, 0.0145, 0.0590, 0.0590, 0.0590, 0.0590, 0.0590, 0.0590, 0.0590, 0.0592],
  [0.4877, 0.0145, 0.0622, 0.0622, 0.0622, 0.0622, 0.0622, 0.0622, 0.0622, 0.0624],
  [0.4631, 0.0145, 0.0653, 0.0653, 0.0653, 0.0653, 0.0653, 0.0653, 0.0653, 0.0653],
  [0.4400, 0.0144, 0.0682, 0.0682, 0.0682, 0.0682, 0.0682, 0.0682, 0.0682, 0.0682],
  [0.4181, 0.0144, 0.0709, 0.0709, 0.0709, 0.0709, 0.0709, 0.0709, 0.0709, 0.0712],
  [0.3969, 0.0143, 0.0736, 0.0736, 0.0736, 0.0736, 0.0736, 0.0736, 0.0736, 0.0736],
  [0.3771, 0.0141, 0.0761, 0.0761, 0.0761, 0.0761, 0.0761, 0.0761, 0.0761, 0.0761],
  [0.3585, 0.0140, 0.0784, 0.0784, 0.0784, 0.0784, 0.0784, 0.0784, 0.0784, 0.0787],
])

EXAMPLE2_COSTS = np.array([
    [0.5986, 0.6986],
    [0.5810, 0.6727],
    [0.6116, 0.7017],
    [0.6762, 0.7649],
    [0.5664, 0.6536],
    [0.6188, 0.6005],
    [0.7107, 0.6924],
    [0.4520, 0.4324],
    [0.5986, 0.5790],
    [0.7714, 0.6714],
])


def example2(rho: float = 0.4) -> PomdpModel:
    B = _rows(EXAMPLE2_B)
    return PomdpModel(
        transitions=np.stack([_rows(EXAMPLE2_P1), _rows(EXAMPLE2_P2)]),
        observations=np.stack([B, B]),
        costs=EXAMPLE2_COSTS,
        discount=rho,
    )


def tridiagonal_kernel(dim: int, diagonal: float) -> np.ndarray:
    """Tridiagonal observation kernel with the given diagonal weight."""
    eps = diagonal
    B = np.zeros((dim, dim))
    for i in range(dim):
        B[i, i] = eps
        if i == 0:
            B[0, 1] = 1 - eps
        elif i == dim - 1:
            B[i, i - 1] = 1 - eps
        else:
            B[i, i - 1] = (1 - eps) / 2
            B[i, i + 1] = (1 - eps) / 2
    return B


EXAMPLE3_P = [np.array(m) for m in (
 [[0.1851, 0.1692, 0.1630, 0.1546, 0.1324, 0.0889, 0.0546, 0.0522],
  [0.1538, 0.1531, 0.1601, 0.1580, 0.1395, 0.0994, 0.0667, 0.0694],
  [0.1307, 0.1378, 0.1489, 0.1595, 0.1472, 0.1143, 0.0769, 0.0847],
  [0.1157, 0.1307, 0.1437, 0.1591, 0.1496, 0.1199, 0.0840, 0.0973],
  [0.1053, 0.1196, 0.1388, 0.1579, 0.1520, 0.1248, 0.0888, 0.1128],
  [0.0850, 0.1056, 0.1326, 0.1618, 0.1585, 0.1348, 0.0977, 0.1240],
  [0.0707, 0.0906, 0.1217, 0.1578, 0.1629, 0.1447, 0.1078, 0.1438],
  [0.0549, 0.0757, 0.1095, 0.1502, 0.1666, 0.1576, 0.1189, 0.1666]],
 [[0.0488, 0.0696, 0.1016, 0.1413, 0.1599, 0.1614, 0.1270, 0.1904],
  [0.0413, 0.0604, 0.0882, 0.1292, 0.1503, 0.1661, 0.1425, 0.2220],
  [0.0329, 0.0482, 0.0752, 0.1195, 0.1525, 0.1694, 0.1519, 0.2504],
  [0.0248, 0.0388, 0.0649, 0.1097, 0.1503, 0.1732, 0.1643, 0.2740],
  [0.0196, 0.0309, 0.0566, 0.0985, 0.1429, 0.1805, 0.1745, 0.2965],
  [0.0158, 0.0258, 0.0517, 0.0934, 0.1392, 0.1785, 0.1794, 0.3162],
  [0.0134, 0.0221, 0.0463, 0.0844, 0.1335, 0.1714, 0.1822, 0.3467],
  [0.0110, 0.0186, 0.0406, 0.0783, 0.1246, 0.1679, 0.1899, 0.3691]],
 [[0.0077, 0.0140, 0.0337, 0.0704, 0.1178, 0.1632, 0.1983, 0.3949],
  [0.0058, 0.0117, 0.0297, 0.0659, 0.1122, 0.1568, 0.1954, 0.4225],
  [0.0041, 0.0090, 0.0244, 0.0581, 0.1011, 0.1494, 0.2013, 0.4526],
  [0.0032, 0.0076, 0.0210, 0.0515, 0.0941, 0.1400, 0.2023, 0.4803],
  [0.0022, 0.0055, 0.0165, 0.0439, 0.0865, 0.1328, 0.2006, 0.5120],
  [0.0017, 0.0044, 0.0132, 0.0362, 0.0751, 0.1264, 0.2046, 0.5384],
  [0.0012, 0.0033, 0.0106, 0.0317, 0.0702, 0.1211, 0.1977, 0.5642],
  [0.0009, 0.0025, 0.0091, 0.0273, 0.0638, 0.1134, 0.2004, 0.5826]],
 [[0.0007, 0.0020, 0.0075, 0.0244, 0.0609, 0.1104, 0.2013, 0.5928],
  [0.0005, 0.0016, 0.0063, 0.0208, 0.0527, 0.1001, 0.1991, 0.6189],
  [0.0004, 0.0013, 0.0049, 0.0177, 0.0468, 0.0923, 0.1981, 0.6385],
  [0.0003, 0.0009, 0.0038, 0.0149, 0.0407, 0.0854, 0.2010, 0.6530],
  [0.0002, 0.0007, 0.0031, 0.0123, 0.0346, 0.0781, 0.2022, 0.6688],
  [0.0001, 0.0005, 0.0023, 0.0100, 0.0303, 0.0713, 0.1980, 0.6875],
  [0.0001, 0.0004, 0.0019, 0.0083, 0.0266, 0.0683, 0.1935, 0.7009],
  [0.0001, 0.0003, 0.0014, 0.0069, 0.0240, 0.0651, 0.1878, 0.7144]],
 [[0.0000, 0.0002, 0.0010, 0.0054, 0.0204, 0.0590, 0.1772, 0.7368],
  [0.0000, 0.0001, 0.0008, 0.0041, 0.0168, 0.0515, 0.1663, 0.7604],
  [0.0000, 0.0001, 0.0006, 0.0038, 0.0156, 0.0480, 0.1596, 0.7723],
  [0.0000, 0.0001, 0.0005, 0.0032, 0.0139, 0.0450, 0.1603, 0.7770],
  [0.0000, 0.0001, 0.0004, 0.0028, 0.0124, 0.0418, 0.1590, 0.7835],
  [0.0000, 0.0001, 0.0003, 0.0023, 0.0106, 0.0389, 0.1547, 0.7931],
  [0.0000, 0.0000, 0.0003, 0.0018, 0.0090, 0.0351, 0.1450, 0.8088],
  [0.0000, 0.0000, 0.0002, 0.0015, 0.0080, 0.0325, 0.1386, 0.8192]],
 [[0.0000, 0.0000, 0.0001, 0.0012, 0.0067, 0.0296, 0.1331, 0.8293],
  [0.0000, 0.0000, 0.0001, 0.0010, 0.0059, 0.0275, 0.1238, 0.8417],
  [0.0000, 0.0000, 0.0001, 0.0009, 0.0056, 0.0272, 0.1238, 0.8424],
  [0.0000, 0.0000, 0.0001, 0.0009, 0.0053, 0.0269, 0.1234, 0.8434],
  [0.0000, 0.0000, 0.0001, 0.0006, 0.0043, 0.0237, 0.1189, 0.8524],
  [0.0000, 0.0000, 0.0001, 0.0005, 0.0038, 0.0215, 0.1129, 0.8612],
  [0.0000, 0.0000, 0.0000, 0.0004, 0.0032, 0.0191, 0.1094, 0.8679],
  [0.0000, 0.0000, 0.0000, 0.0003, 0.0025, 0.0161, 0.1011, 0.8800]],
 [[0.0000, 0.0000, 0.0000, 0.0003, 0.0022, 0.0143, 0.0938, 0.8894],
  [0.0000, 0.0000, 0.0000, 0.0002, 0.0019, 0.0136, 0.0901, 0.8942],
  [0.0000, 0.0000, 0.0000, 0.0002, 0.0017, 0.0126, 0.0849, 0.9006],
  [0.0000, 0.0000, 0.0000, 0.0002, 0.0015, 0.0118, 0.0819, 0.9046],
  [0.0000, 0.0000, 0.0000, 0.0001, 0.0013, 0.0108, 0.0754, 0.9124],
  [0.0000, 0.0000, 0.0000, 0.0001, 0.0011, 0.0098, 0.0714, 0.9176],
  [0.0000, 0.0000, 0.0000, 0.0001, 0.0010, 0.0090, 0.0713, 0.9186],
  [0.0000, 0.0000, 0.0000, 0.0001, 0.0009, 0.0084, 0.0675, 0.9231]],
 [[0.0000, 0.0000, 0.0000, 0.0001, 0.0008, 0.0078, 0.0665, 0.9248],
  [0.0000, 0.0000, 0.0000, 0.0000, 0.0007, 0.0068, 0.0626, 0.9299],
  [0.0000, 0.0000, 0.0000, 0.0000, 0.0006, 0.0061, 0.0581, 0.9352],
  [0.0000, 0.0000, 0.0000, 0.0000, 0.0005, 0.0057, 0.0561, 0.9377],
  [0.0000, 0.0000, 0.0000, 0.0000, 0.0005, 0.0053, 0.0558, 0.9384],
  [0.0000, 0.0000, 0.0000, 0.0000, 0.0004, 0.0051, 0.0558, 0.9387],
  [0.0000, 0.0000, 0.0000, 0.0000, 0.0004, 0.0045, 0.0522, 0.9429],
  [0.0000, 0.0000, 0.0000, 0.0000, 0.0003, 0.0040, 0.0505, 0.9452]],
)]

EXAMPLE3_COST_ROWS = np.array([
  [1.0000, 2.2486, 4.1862, 6.9509, 11.2709, 15.9589, 21.4617, 27.6965],
  [31.3230, 8.8185, 9.6669, 11.4094, 14.2352, 17.8532, 22.3155, 27.5353],
  [50.0039, 26.3162, 14.6326, 15.3534, 17.1427, 19.7455, 23.1064, 27.3025],
  [65.0359, 40.2025, 27.5380, 19.5840, 20.3017, 21.8682, 24.2022, 27.4108],
  [79.1544, 53.1922, 39.5408, 30.5670, 23.3697, 23.9185, 25.1941, 27.4021],
  [90.7494, 63.6983, 48.6593, 38.6848, 30.4868, 25.7601, 26.0012, 27.1867],
  [99.1985, 71.1173, 55.0183, 44.0069, 34.7860, 29.0205, 26.9721, 27.1546],
  [106.3851, 77.2019, 60.0885, 47.8917, 37.6330, 30.8279, 27.7274, 26.4338],
])


def example3(rho: float = 0.4) -> PomdpModel:
    """8-state, 8-action model; the cost table is laid out state-by-row."""
    B = tridiagonal_kernel(8, 0.7)
    return PomdpModel(
        transitions=np.stack([_rows(P) for P in EXAMPLE3_P]),
        observations=np.stack([B] * 8),
        costs=EXAMPLE3_COST_ROWS,
        discount=rho,
    )


def example4(theta1: float, theta2: float, rho: float = 0.4,
             num_obs: int = 8) -> PomdpModel:
    """Parametric 3-state family; valid for theta1 + theta2 <= 1 and
    theta2 >= theta1, with a quantized-Gaussian kernel standing in for
    the additive-noise observations."""
    P2 = np.array([
        [1.0, 0.0, 0.0],
        [1 - 2 * theta1, theta1, theta1],
        [1 - 2 * theta2, theta2, theta2],
    ])
    P1 = P2 @ P2
    from .model import quantized_gaussian_observation

    B = quantized_gaussian_observation([1.0, 2.0, 3.0], 1.0, num_obs)
    costs = np.array([[1.0, 1.2], [1.1, 1.1], [1.2, 1.1]])
    return PomdpModel(
        transitions=np.stack([P1, P2]),
        observations=np.stack([B, B]),
        costs=costs,
        discount=rho,
    )
