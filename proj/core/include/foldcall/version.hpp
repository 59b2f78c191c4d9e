#pragma once

#include <string>

namespace foldcall {

std::string version_string();

/// Stable hash of the default reward hyperparameter block, printed with
/// --version so experiment logs can be traced to the defaults they ran
/// under.
std::string defaults_fingerprint();

}  // namespace foldcall
