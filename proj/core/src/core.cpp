#include "casray/core.hpp"

namespace casray {

const char* versionString() { return "1.0.0"; }

}  // namespace casray
