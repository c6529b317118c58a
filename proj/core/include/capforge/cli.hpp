#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace capforge::cli {

// Entry point shared by the capforge binary and the tests. Returns the
// process exit status: 0 on success, 1 on validation/domain errors, 2 on
// usage errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace capforge::cli
