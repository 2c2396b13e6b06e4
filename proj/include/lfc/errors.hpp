#pragma once

#include <stdexcept>
#include <string>

namespace lfc {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define LFC_DEFINE_ERROR(NAME)                               \
  struct NAME : Error {                                      \
    explicit NAME(const std::string& msg) : Error(msg) {}    \
  }

// Light-field container / I/O
LFC_DEFINE_ERROR(MissingView);
LFC_DEFINE_ERROR(InconsistentDimensions);
LFC_DEFINE_ERROR(FormatError);
LFC_DEFINE_ERROR(InvalidGrid);
LFC_DEFINE_ERROR(DisparityOutOfRange);

// Codec
LFC_DEFINE_ERROR(InvalidGop);
LFC_DEFINE_ERROR(InvalidQp);
LFC_DEFINE_ERROR(IllegalDrop);
LFC_DEFINE_ERROR(BrokenReference);
LFC_DEFINE_ERROR(CorruptStream);
LFC_DEFINE_ERROR(VersionError);

// Synthesis / networks
LFC_DEFINE_ERROR(ShapeError);
LFC_DEFINE_ERROR(NoReferences);
LFC_DEFINE_ERROR(ModelShapeError);
LFC_DEFINE_ERROR(ModelFormatError);
LFC_DEFINE_ERROR(DomainError);
LFC_DEFINE_ERROR(NumericalDivergence);
LFC_DEFINE_ERROR(PatchTooLarge);

// RDO / pipeline
LFC_DEFINE_ERROR(MissingReference);
LFC_DEFINE_ERROR(NoModelForQp);

// Metrics
LFC_DEFINE_ERROR(NoOverlap);
LFC_DEFINE_ERROR(DegenerateFit);

#undef LFC_DEFINE_ERROR

}  // namespace lfc
