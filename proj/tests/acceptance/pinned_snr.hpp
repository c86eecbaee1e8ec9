// Pilot-run means for the signal/noise sweep (seeds 1..10, 200 x 2000,
// noise std 0.1). Regenerate with:
//   repsim snr-sweep --seeds 1 2 3 4 5 6 7 8 9 10 -o <dir>
#pragma once

#include <array>

namespace pinned {

struct SnrCell {
  std::size_t k;
  double mean_cca;
  double pwcca;
  double svcca;
};

inline constexpr std::array<SnrCell, 10> kSnrSweep{{
    {20, 0.667864170892, 0.527269699936, 0.669272364102},
    {50, 0.572201843339, 0.250924563025, 0.569058026282},
    {70, 0.505746942549, 0.150801929598, 0.497050089357},
    {80, 0.471918191548, 0.117122344966, 0.459413772130},
    {100, 0.402341591159, 0.070216274740, 0.380675848446},
    {120, 0.329623913025, 0.040725951584, 0.295771163001},
    {140, 0.254222323020, 0.022174017828, 0.206598258821},
    {160, 0.174849025552, 0.010340410818, 0.109670272865},
    {180, 0.091126458634, 0.003239087948, 0.005366515196},
    {199, 0.004902492237, 0.000041765248, 0.000000065283},
}};

}  // namespace pinned
