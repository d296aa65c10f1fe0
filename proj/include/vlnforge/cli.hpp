#pragma once

namespace vlnforge {

/// Entry point of the `forge` command line tool.
/// Exit codes: 0 ok, 1 validation failures, 2 usage errors, 3 I/O errors.
int cli_main(int argc, char** argv);

}  // namespace vlnforge
