#pragma once

#include <stdexcept>
#include <string>

namespace qgs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define QGS_ERROR(name)                         \
  struct name : Error {                         \
    explicit name(const std::string& what)      \
        : Error(std::string(#name ": ") + what) {} \
  }

QGS_ERROR(SchemaError);
QGS_ERROR(DisconnectedGraph);
QGS_ERROR(NonPositiveLength);
QGS_ERROR(MalformedMatching);
QGS_ERROR(UnsupportedDegree);
QGS_ERROR(AtThreshold);
QGS_ERROR(SingularVertexMatrix);
QGS_ERROR(TrappedStateSuspected);
QGS_ERROR(NotAStar);
QGS_ERROR(GridTooCoarse);
QGS_ERROR(InconsistentCalibration);
QGS_ERROR(OrbitBudgetExceeded);
QGS_ERROR(SeriesNotConverged);

#undef QGS_ERROR

}  // namespace qgs
