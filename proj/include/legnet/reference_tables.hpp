#pragma once

#include <array>

// Built-in worked example: a single three-variable LEG over [I1, I2, O]
// with soft evidence P(I1)=0.9, P(I2)=0.1, plus the golden values the
// reproduce-tables command checks itself against. Table 1 holds the two
// single-pass orders; Table 2 holds three full sweeps of the iterative
// update for each order. One table 1(b) entry is corrected here: 0.1970188
// for P(I2) contradicts the row's own error column (0.0970788) and direct
// recomputation, both of which give 0.1970788.
namespace legnet::golden {

inline constexpr std::array<double, 8> kFigure2Table = {
    0.40, 0.05, 0.05, 0.00, 0.00, 0.10, 0.10, 0.30};

inline constexpr double kEvidenceI1 = 0.9;
inline constexpr double kEvidenceI2 = 0.1;

// Row layout: P(I1), P(I2), P(O), error.
using Row = std::array<double, 4>;

inline constexpr std::array<Row, 2> kTable1a = {{
    {0.9000000, 0.6272727, 0.8181819, 0.5272727},
    {0.8200424, 0.1000000, 0.5814776, 0.0799575},
}};

inline constexpr std::array<Row, 2> kTable1b = {{
    {0.3121212, 0.1000000, 0.2525252, 0.5878788},
    {0.9000000, 0.1970788, 0.6673082, 0.0970788},
}};

inline constexpr std::array<Row, 6> kTable2a = {{
    {0.9000000, 0.6272728, 0.8181819, 0.5272728},
    {0.8200424, 0.1000000, 0.5814776, 0.0799575},
    {0.9000000, 0.1073947, 0.6366036, 0.0073947},
    {0.8993579, 0.1000000, 0.6336551, 0.0006421},
    {0.9000000, 0.1000554, 0.6340969, 0.0000554},
    {0.8999953, 0.1000000, 0.6340749, 0.0000047},
}};

inline constexpr std::array<Row, 6> kTable2b = {{
    {0.3121212, 0.1000000, 0.2525252, 0.5878788},
    {0.9000000, 0.1970788, 0.6673082, 0.0970788},
    {0.8908822, 0.1000000, 0.6280743, 0.0091178},
    {0.9000000, 0.1007928, 0.6343487, 0.0007928},
    {0.8999316, 0.1000000, 0.6340329, 0.0000684},
    {0.9000000, 0.1000059, 0.6340800, 0.0000059},
}};

inline constexpr double kTable1Tol = 1e-6;
inline constexpr double kTable2Tol = 1e-5;

// Limit of the iterative update (both orders), computed to tol 1e-12.
inline constexpr double kIpfLimitGoal = 0.634077988115;

}  // namespace legnet::golden
