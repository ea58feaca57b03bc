// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "codeprune/error.hpp"

namespace codeprune {

std::string_view error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::BadMagic: return "BadMagic";
        case ErrorKind::BadManifest: return "BadManifest";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::InvalidCheckpoint: return "InvalidCheckpoint";
        case ErrorKind::UnknownId: return "UnknownId";
        case ErrorKind::ClosureViolation: return "ClosureViolation";
        case ErrorKind::BadFormat: return "BadFormat";
        case ErrorKind::IdOutOfRange: return "IdOutOfRange";
        case ErrorKind::SequenceTooLong: return "SequenceTooLong";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::VocabMismatch: return "VocabMismatch";
        case ErrorKind::EmptyCalibration: return "EmptyCalibration";
        case ErrorKind::FingerprintMismatch: return "FingerprintMismatch";
        case ErrorKind::BadLayerIndex: return "BadLayerIndex";
        case ErrorKind::TooFewLayers: return "TooFewLayers";
        case ErrorKind::BadK: return "BadK";
        case ErrorKind::BadIndexList: return "BadIndexList";
        case ErrorKind::BadRemap: return "BadRemap";
        case ErrorKind::MissingTests: return "MissingTests";
        case ErrorKind::ExecutorUnavailable: return "ExecutorUnavailable";
        case ErrorKind::ZeroSavings: return "ZeroSavings";
    }
    return "Unknown";
}

bool is_io_error(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::BadMagic:
        case ErrorKind::BadManifest:
        case ErrorKind::ShapeMismatch:
        case ErrorKind::IoFailure:
        case ErrorKind::BadFormat:
            return true;
        default:
            return false;
    }
}

}  // namespace codeprune
