#pragma once

#include <stdexcept>
#include <string>

namespace paxsim {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// schedule() with a fire time earlier than the current virtual clock.
struct PastEventError : SimError {
    using SimError::SimError;
};

// crash() on a node that is already dead.
struct AlreadyDeadError : SimError {
    using SimError::SimError;
};

// Internal protocol invariant broken; always a bug, never an input error.
struct ProtocolBugError : std::logic_error {
    using std::logic_error::logic_error;
};

// Scenario text that does not parse; carries a 1-based line number.
struct ParseError : SimError {
    ParseError(int line, const std::string& what)
        : SimError("line " + std::to_string(line) + ": " + what), line(line) {}
    int line;
};

// Scenario that parses but names an impossible configuration.
struct ConfigError : SimError {
    using SimError::SimError;
};

#define PAXSIM_BUG(cond, msg) \
    do { \
        if (!(cond)) throw ::paxsim::ProtocolBugError(msg); \
    } while (0)

}  // namespace paxsim
