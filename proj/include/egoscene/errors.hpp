// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace egoscene {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Camera
struct OutOfFovError : Error { using Error::Error; };
struct DegenerateRayError : Error { using Error::Error; };
struct NonPositiveDepthError : Error { using Error::Error; };
struct InvalidCalibrationError : Error { using Error::Error; };

// Generic shape / parse / io
struct ShapeMismatchError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct InvalidSpecError : Error { using Error::Error; };

// Depth / metrics
struct NoOverlapError : Error { using Error::Error; };
struct NonPositiveGtError : Error { using Error::Error; };
struct EmptyBoundaryError : Error { using Error::Error; };
struct EmptySceneError : Error { using Error::Error; };

// Pose evaluation / optimization
struct DegenerateConfigurationError : Error { using Error::Error; };
struct InvalidTemplateError : Error { using Error::Error; };
struct NonFiniteEnergyError : Error { using Error::Error; };

}  // namespace egoscene
