#pragma once

#include <stdexcept>
#include <string>

namespace spikegrad {

// Coarse error class; the CLI maps it to an exit code.
enum class ErrorKind { usage, config, io, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define SPIKEGRAD_ERROR(Name, Kind)                                              \
    class Name : public Error {                                                  \
    public:                                                                      \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
    };

SPIKEGRAD_ERROR(ShapeMismatch, usage)
SPIKEGRAD_ERROR(InvalidArgument, usage)
SPIKEGRAD_ERROR(MissingData, usage)
SPIKEGRAD_ERROR(ZeroRow, numerical)
SPIKEGRAD_ERROR(ZeroResidue, numerical)
SPIKEGRAD_ERROR(ZeroVector, numerical)
SPIKEGRAD_ERROR(NotOrthonormal, numerical)
SPIKEGRAD_ERROR(DegenerateSpectrum, numerical)
SPIKEGRAD_ERROR(DegenerateFit, numerical)
SPIKEGRAD_ERROR(ConvergenceFailure, numerical)
SPIKEGRAD_ERROR(DivergenceDetected, numerical)
SPIKEGRAD_ERROR(BadMagic, io)
SPIKEGRAD_ERROR(TruncatedFile, io)
SPIKEGRAD_ERROR(RaggedRows, io)
SPIKEGRAD_ERROR(ParseFailure, io)
SPIKEGRAD_ERROR(IoError, io)
SPIKEGRAD_ERROR(ConfigError, config)

#undef SPIKEGRAD_ERROR

}  // namespace spikegrad
