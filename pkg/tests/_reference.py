"""Frozen reference values for the test suite.

Every number here was computed independently of the package, with 40-digit
interval-checked arithmetic, before the corresponding production code was
written.  Keys encode the inputs: e.g. ``"0.5|0.5|-2"`` is
``alpha|delta|x``.  Do not regenerate these from package output.
"""

D_ALPHA = {
    0.3: 0.2593863780857229,
    0.5: 0.3989422804014327,
    0.8: 0.5639169059999808,
    0.999: 0.6363500965679503,
    1.0: 0.6366197723675814,
}

PDF = {  # alpha|delta|x -> density of the unit-scale law
    "0.3|-0.7|0.5": 0.028072378126428373,
    "0.3|0|1": 0.05339587124466317,
    "0.5|0.5|-0.5": 0.06284350108116318,
    "0.5|0.5|-2": 0.01587692712290128,
    "0.5|0.5|0": 0.30557749073643903,
    "0.5|0.5|1": 0.15924029708793996,
    "0.5|0|0": 0.6366197723675814,
    "0.5|0|0.5": 0.17076240172520624,
    "0.5|0|1": 0.08610714691260411,
    "0.5|0|4": 0.016505738422126288,
    "0.8|0.3|2": 0.12771230235680772,
    "0.8|0|0": 0.3606460866352936,
}

CDF = {  # alpha|delta|x
    "0.3|0|1": 0.7134940040788886,
    "0.5|0.5|-1": 0.1190738028509076,
    "0.5|0.5|1": 0.5399839777834091,
    "0.5|0|0.5": 0.6686904499992419,
    "0.5|0|2": 0.7860718377246163,
    "0.8|0.3|1": 0.48643926954638983,
}

TRUE_TAIL = {  # alpha|delta|x -> P(Z > x)
    "0.5|0.5|50": 0.08214325976747437,
    "0.5|0|20": 0.08161886371563402,
}

TAIL_ASYMPTOTE = {  # alpha|delta|x|side
    "0.5|0.5|1|lower": 0.19947114020071635,
    "0.5|0|4|upper": 0.19947114020071635,
    "1|0|10|upper": 0.03183098861837907,
}

SUP_DENSITY = {  # alpha|delta
    "0.5|0": 0.6366197723675814,
    "0.8|0": 0.3606460866352936,
    "1|0": 0.3183098861837907,
}

# Oscillatory improper integrals (tail-integration fixtures):
#   int_1^inf   cos(2u) u^{-1.5} du
#   int_0.5^inf cos(u)  u^{-2}   du
#   int_1^inf   sin(u)  u^{-0.5} du
OSC_TAIL = {
    "cos2_s1.5_from1": -0.3867065296036316,
    "cos1_s2_from0.5": 0.6774762150289155,
    "sin1_s0.5_from1": 0.632777533868738,
}

# Singular-endpoint fixtures:
#   int_0^1 (cos u - 1)  u^{-1.5} du
#   int_0^1 (cos 2u - 1) u^{-1.3} du
INNER_SINGULAR = {
    "cos_s1.5": -0.3216778186298038,
    "cos2_s1.3": -1.0110887518061897,
}

GAMMA = {  # alpha|n -> solution of g = (n log g)^(1/alpha)
    "1|10": 35.77152063957297,
    "1|100": 647.2775124394004,
    "1|1000": 9118.00647040274,
    "1|10000": 116671.14532566354,
    "1|100000": 1416360.0815810184,
    "0.75|10": 198.66306523728332,
    "0.75|100": 8795.053211134811,
    "0.75|1000": 292802.39622407104,
    "0.6|10": 1219.0605580748518,
    "0.6|100": 131522.9642357008,
    "0.5|10": 8099.119062638038,
    "0.5|100": 2122264.570565265,
}
GAMMA_RATIO_NLOGN_1E8 = 1.1665249641256887  # gamma_n/(n log n) at alpha=1, n=1e8

TRUNC_MEAN_PARETO = {  # alpha|delta|t -> signed truncated mean at level t
    "0.5|0.5|10": 1.0811388300841898,
    "1|0|100": 0.0,
}
MIXED_TAIL_X2 = 0.2651650429449553  # two-component model upper tail at x=2
                                    # (alpha=0.5, alphat=1.5, A=Atilde=0.5, delta=0)

SIGMA_EX1 = {0.5: 1.5707963267948966, 1.0: 1.5707963267948966}  # = pi/2
SIGMA_EX2_A05 = 0.39269908169872414                              # = pi/8
SIGMA_APPB = {1.0: 2.134933555668392, 0.5: 0.4744296790374204}   # pi*e/4 at 1

# Logarithmic-tail (slowly varying) model, alpha = 0.5:
LOGTAIL_C_A05 = 0.13739343922501068          # normalising constant c
LOGTAIL_DENSITY_E_A05 = 0.030656620097620192  # density at x = e
LOGTAIL_TAIL_E2_A05 = 0.40435377314175563     # P(X > e^2)

# Closed-form bound terms:
EX1_A1_T2_N100 = 0.08056752891277547          # (3 + log(sigma n))/n at n=100
EX2_TERMS_N100 = [0.01, 0.018709336603610422, 0.09974880856069727,
                  0.020879593679238796]       # all four terms, alpha=0.5 model
BOUND_APPB_1_10 = 0.3795519961468257          # 1/log g + log g / g, alpha=1, n=10

# Reference slopes of log-log least-squares fits over n = 10^2..10^6:
SLOPE_EX1_A05 = -1.0004546610723892
SLOPE_EX1_A1_LOGSQ = -1.024334074325211
SLOPE_EX1_DELTA_TERM = -1.0
SLOPE_EX2 = -0.6068703293827199
SLOPE_APPB_INVERSE_LOG = -0.9126167625589454

KOL_FROM_WBETA_CAUCHY_0P01 = 0.13183098861837908  # (1 + 1/pi) sqrt(1e-2)
QT_CONTRACTION_E06 = 0.5488116360940264           # exp(-0.6)
