"""Reference values frozen from scripts/oracles.py (mpmath, 40 digits)."""
BESOV2_PDF0 = 0.56418958354775629
ERF1 = 0.84270079294971487
LOG17 = 2.8332133440562161
FISHER_CAUCHY = 0.5
FISHER_BESOV2 = 2.0
FISHER_BESOV15 = 1.4837731947350926
HELLINGER_CAUCHY_2 = 0.83462684167407319
HELLINGER_BESOV1_1 = 0.90979598956895014
HELLINGER_BESOV2_2 = 0.36787944117144232
KAKUTANI_GEOMETRIC = 0.92004441462932325
ZETA2_PARTIAL_100 = 1.6349839001848929
CAUCHY_RATIO_R = [0.55984987754527636, 0.51546178053733668, 0.50389607167897342, 0.50097592663236902]
BESOV1_RATIO_R = [0.7471794542170685, 0.66619606351169495, 0.63399395301154813, 0.61970374858789522]
BESOV1_BALL_R = [0.23640421479535967, 0.084225436295274283, 0.025514349791417271, 0.0070495106058339079]
CAUCHY_BOX_A = [0.80543235016985017, 1.0, 7.3210757428908109]
