#pragma once

#include <vector>

#include "schedsec/lti_estimation.hpp"

namespace schedsec {

/// Three unstable second-order processes sharing one channel, each measured
/// through C = [1 1] with unit noise. Pi is the identity (the steady state
/// does not depend on it).
std::vector<LinearSystem> three_process_systems();

} // namespace schedsec
