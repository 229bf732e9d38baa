#pragma once

namespace opdyn::cli {

/// Full command-line front end. Exit status: 0 on success/pass, 1 when a
/// certificate or evidence check is refuted, 2 on input errors.
int run(int argc, const char* const* argv);

}  // namespace opdyn::cli
