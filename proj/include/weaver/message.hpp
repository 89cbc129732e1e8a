#pragma once

#include <string>
#include <vector>

namespace weaver {

struct Message {
    std::string role;  // "system", "user" or "assistant"
    std::string content;

    bool operator==(const Message&) const = default;
};

using Messages = std::vector<Message>;

}  // namespace weaver
