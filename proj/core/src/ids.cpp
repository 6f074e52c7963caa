#include "radreason/ids.hpp"

namespace radreason {

bool is_valid_identifier(std::string_view text) {
    if (text.empty() || text.size() > 64) return false;
    for (unsigned char c : text) {
        if (c < 0x20 || c == 0x7f) return false;
    }
    return true;
}

}  // namespace radreason
