// Scores a few hand-written sequences with the block-alignment metric and
// shows how the tolerance T changes the outcome.
#include <iostream>

#include "gestime/gestime.hpp"

using namespace gestime;

int main() {
  constexpr auto N = GestureClass::NoGesture;
  constexpr auto S = GestureClass::IdeationalStroke;
  constexpr auto B = GestureClass::Beat;

  // Truth: stroke over frames 3..5. Prediction starts one frame early and
  // ends one frame late.
  const LabelSequence truth = {N, N, N, S, S, S, N, N, B, N};
  const LabelSequence pred = {N, N, S, S, S, S, S, N, B, N};

  for (std::int64_t t : {1, 2}) {
    MetricConfig cfg;
    cfg.threshold = t;
    const EvalScores s = score(std::vector<LabelSequence>{pred}, std::vector<LabelSequence>{truth}, cfg);
    std::cout << markdown_scores("T = " + std::to_string(t), s) << '\n';
  }
}
