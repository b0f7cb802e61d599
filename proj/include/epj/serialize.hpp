#pragma once

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "epj/extended_jordan.hpp"
#include "epj/jordan.hpp"
#include "epj/puiseux.hpp"
#include "epj/spectrum.hpp"

namespace epj {

using Json = nlohmann::json;

// Complex numbers are encoded as [re, im], vectors as arrays of those and
// matrices as arrays of rows. Non-finite reals become null.

Json to_json(Complex z);
Complex complex_from_json(const Json& j);
Json to_json(const VectorXc& v);
VectorXc vector_from_json(const Json& j);
Json to_json(const MatrixXc& m);
MatrixXc matrix_from_json(const Json& j);

Json to_json(const ModelParams& p);
ModelParams model_from_json(const Json& j);

Json to_json(const EpCertificate& ep);
EpCertificate ep_from_json(const Json& j);

/// Includes gram, block, chain residuals and the c-independent P0 H P0 block.
Json to_json(const JordanBasis& b);
/// Restores the vectors and recomputes gram, block and chain residuals.
JordanBasis jordan_from_json(const Json& j);

Json to_json(const Eigenpair& e);
Eigenpair eigenpair_from_json(const Json& j);

Json to_json(const ExtendedJordanBasis& b);
/// Rebuilds the basis from the stored eigenpairs with build_extended.
ExtendedJordanBasis extended_from_json(const Json& j);

Json to_json(const PuiseuxFit& f);
PuiseuxFit puiseux_fit_from_json(const Json& j);

Json to_json(const ConvergenceReport& r);

/// CSV of scan rows: param, branch_id, sheet, re_z, im_z, re_full_norm,
/// im_full_norm, is_extraneous.
void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows);
Json to_json(const std::vector<ScanRow>& rows);

} // namespace epj
