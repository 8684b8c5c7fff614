#pragma once

#include <string>

#include "egopt/benchbox.hpp"
#include "egopt/search_space.hpp"

namespace egopt {

/// External black-box protocol: per evaluation the command is run under
/// `/bin/sh -c`; one JSON object {"eval_id": ..., "seed": ..., "params":
/// {name: value}} is written to its standard input; the last non-empty,
/// whitespace-trimmed line of its standard output must parse as a finite
/// decimal number (the response, in the user's direction). A nonzero exit
/// status or unparseable output counts as a failed evaluation.
///
/// Recorded durations are whole seconds of wall clock (floor); sub-second
/// process jitter would otherwise make identically seeded runs differ.
bench::Evaluator make_command_evaluator(const std::string& command, const SearchSpace& space,
                                        bench::Direction direction);

}  // namespace egopt
