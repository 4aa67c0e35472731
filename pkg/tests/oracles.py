"""Frozen reference values from scripts/derive_oracles.py (mpmath, 50 digits)."""

H_ONE_SIXTH = 0.6500224216483542
TAYLOR_AT_ONE = 0.15842789281477135
PAIR_EXP_025_04_40 = 0.8459546875988606
CLUSTER_EXP_02_015_005_50 = 0.6463969571159561
LEMMA_NEG_HALF = 8.056196127776259
ALPHA_SIGN_03_09 = -0.22360304288404387
FIRST_MOMENT_01_100 = 14.268710120293978
PSI_M1 = 0.7493406484508998
COARSE_3_08_20 = 1.3835058055282163
GAUSS_UPPER_1 = 0.24197072451914334
TAIL_2 = 0.02275013194817921
TAIL_3 = 0.0013498980316300946
TAIL_1 = 0.15865525393145705
BIV_0_1 = 0.05854983152431916
XI_EPS_02 = 1.024e-09
KAPPA_STAR_SQRT_LN2 = 0.8408964152537145
# n=5, p=3, seed=11: energies of configs 0, 1, 7, 19, 31
ENERGY_5_3_SEED11 = {0: 0.18615929814861362, 1: -0.22067599754364448, 7: 0.6930305436446361, 19: 0.9367624839650576, 31: -0.18615929814861362}
