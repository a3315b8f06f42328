#pragma once

#include <stdexcept>
#include <string>

namespace fabtag {

// Category drives the CLI exit code: format errors exit 3, spec violations 4.
enum class ErrorKind { Format, Spec, Domain, Io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), kind_(kind), name_(std::move(name)) {}
    ErrorKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

private:
    ErrorKind kind_;
    std::string name_;
};

#define FABTAG_ERROR(NAME, KIND)                                             \
    class NAME : public Error {                                              \
    public:                                                                  \
        explicit NAME(const std::string& what)                               \
            : Error(ErrorKind::KIND, #NAME, what) {}                         \
    }

// geometry
FABTAG_ERROR(TruncatedFile, Format);
FABTAG_ERROR(MalformedSyntax, Format);
FABTAG_ERROR(NonFiniteVertex, Format);
FABTAG_ERROR(EmptyMesh, Domain);
FABTAG_ERROR(OpenMesh, Domain);
FABTAG_ERROR(PitchTooCoarse, Domain);
FABTAG_ERROR(InfoProtrudes, Spec);
FABTAG_ERROR(SpecViolation, Spec);
FABTAG_ERROR(ModeInapplicable, Domain);
FABTAG_ERROR(IoFailure, Io);

// payload
FABTAG_ERROR(OnesOutOfRange, Spec);
FABTAG_ERROR(BadMagic, Format);
FABTAG_ERROR(DimensionMismatch, Format);

// thermsim / nirsim
FABTAG_ERROR(UnstableDt, Domain);
FABTAG_ERROR(FormatError, Format);
FABTAG_ERROR(LengthMismatch, Format);
FABTAG_ERROR(WindowOutOfBounds, Domain);

// imaging
FABTAG_ERROR(ImageTooSmall, Domain);
FABTAG_ERROR(DegenerateHistogram, Domain);
FABTAG_ERROR(NoContours, Domain);

// decode
FABTAG_ERROR(NoObjectContour, Domain);
FABTAG_ERROR(NoAnchorContour, Domain);
FABTAG_ERROR(EmptyRecording, Domain);

// harness
FABTAG_ERROR(OutOfTable, Domain);
FABTAG_ERROR(IncompleteCoverage, Domain);

#undef FABTAG_ERROR

} // namespace fabtag
