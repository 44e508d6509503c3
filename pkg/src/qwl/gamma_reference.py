"""Upper incomplete gamma values computed once with mpmath at 30 digits."""

# (s, x, Gamma(s, x))
TABLE = (
    (-0.5, 0.1, 3.40176933669161525743),
    (-0.5, 1.0, 0.178147711781560690192),
    (-0.5, 10.0, 1.26090426132415706813e-6),
    (0.0, 0.1, 1.822923958419390615852),
    (0.0, 1.0, 0.21938393439552027368),
    (0.0, 10.0, 4.15696892968532427740e-6),
    (0.5, 0.1, 1.16046248479374423088),
    (0.5, 1.0, 0.278805585280661976499),
    (0.5, 10.0, 1.37262662354498576605e-5),
    (1.5, 0.1, 0.866365957710827317283),
    (1.5, 1.0, 0.5072822338117733098),
    (1.5, 10.0, 1.50430316778844290776e-4),
    (2.5, 0.1, 1.32816240809763649770),
    (2.5, 1.0, 1.12880279188910228636),
    (2.5, 10.0, 1.66131731177946005562e-3),
    (-0.8, 0.1, 5.27737890497403302601),
    (-0.8, 1.0, 0.159261334502628190762),
    (-0.8, 10.0, 6.16785853227088188986e-7),
    (0.2, 0.1, 1.48723502072360925296),
    (0.2, 1.0, 0.240470373569339768215),
    (0.2, 10.0, 6.70197527929582337860e-6),
)

E1_AT_1 = 0.21938393439552027368
E1_AT_2 = 0.0489005107080611195672
SQRT_PI = 1.77245385090551602730
