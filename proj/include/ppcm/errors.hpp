#pragma once

#include <stdexcept>
#include <string>

namespace ppcm {

// Base of every error raised by the library. Pure kinematic functions throw;
// the simulation loop catches and converts to telemetry flags.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tendon triple or configuration outside the domain of a closed-form map.
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed argument (non-finite value, tendon shorter than its disk passages, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Configuration outside geometry limits while strict checking is enabled.
class LimitViolation : public Error {
public:
    using Error::Error;
};

class SingularityError : public Error {
public:
    using Error::Error;
};

class InvalidGripperCombination : public Error {
public:
    using Error::Error;
};

// Valid gripper tuple that cannot be applied in the current state
// (zone mismatch with the ballscrew position, ballscrew still moving).
class GripperPreconditionError : public Error {
public:
    using Error::Error;
};

class StepRejected : public Error {
public:
    using Error::Error;
};

class ControlFault : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ScriptError : public Error {
public:
    using Error::Error;
};

class SimFault : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ppcm
