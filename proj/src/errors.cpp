#include "fermobius/errors.hpp"

namespace fm {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConstraintViolation: return "constraint violation";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::NumericalConsistency: return "numerical consistency error";
    case ErrorKind::Structure: return "structure error";
    case ErrorKind::Pole: return "pole error";
    case ErrorKind::Admissibility: return "admissibility error";
    case ErrorKind::FlowSingularity: return "flow singularity";
    case ErrorKind::Accuracy: return "accuracy error";
    case ErrorKind::OnDiscontinuity: return "on-discontinuity error";
    case ErrorKind::Pairing: return "pairing error";
    case ErrorKind::Degeneracy: return "degeneracy error";
    case ErrorKind::Unsupported: return "unsupported case";
    case ErrorKind::ThetaNull: return "theta-null error";
    case ErrorKind::Integration: return "integration error";
    case ErrorKind::Contour: return "contour error";
    case ErrorKind::Ordering: return "ordering error";
    case ErrorKind::Fit: return "fit error";
    case ErrorKind::Shape: return "shape error";
  }
  return "error";
}

}  // namespace fm
