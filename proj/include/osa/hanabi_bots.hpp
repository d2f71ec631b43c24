#pragma once

#include <memory>
#include <string>
#include <vector>

#include "osa/hanabi.hpp"
#include "osa/policy.hpp"

namespace osa::hanabi {

// Scripted Hanabi conventions. Rule precedence for each bot is documented in
// docs/bots.md and frozen by the tests; all four are deterministic and
// Markov-in-observation (hint knowledge is public).
//
//   valuebot:  plays provably playable cards; hints playable then valuable
//              partner cards, preferring color hints; discards oldest.
//   holmesbot: valuebot plus risk plays at full-ish lives and inference-flavored
//              hint/discard targeting (highest-rank playable hint, discards
//              oldest untouched card).
//   iggi:      plays provably playable cards; prefers rank hints; discards
//              provably dead cards before the oldest.
//   piers:     iggi plus cautious risk plays and protection of provably
//              valuable cards when discarding.
std::shared_ptr<const Policy> make_valuebot();
std::shared_ptr<const Policy> make_holmesbot();
std::shared_ptr<const Policy> make_iggi();
std::shared_ptr<const Policy> make_piers();

// The four bots in fixed portfolio order, each optionally eps-noise wrapped.
std::vector<std::shared_ptr<const Policy>> standard_bots(double epsilon = 0.0);

std::shared_ptr<const Policy> make_bot(const std::string& name);

}  // namespace osa::hanabi
