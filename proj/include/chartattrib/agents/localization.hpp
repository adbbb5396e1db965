#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chartattrib/agents/chart2table.hpp"
#include "chartattrib/chartgen/geometry.hpp"
#include "chartattrib/core/types.hpp"
#include "chartattrib/img/image.hpp"
#include "chartattrib/llm/gateway.hpp"

namespace chartattrib::agents {

enum class MarkKind { bar, slice, point, segment };

std::string to_string(MarkKind kind);
MarkKind mark_kind_from_string(const std::string& s);

struct DataMark {
  int id = 0;  // 1-based label, unique per image
  MarkKind kind = MarkKind::bar;
  core::BBox region;
  std::optional<core::CellRef> cell;  // known for the synthetic oracle detector
};

/// Detector port: any source of candidate data marks.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::string identity() const = 0;
  /// Raw marks (ids ignored); detect_marks assigns deterministic ids.
  virtual std::vector<DataMark> detect(const img::Image& image,
                                       core::ChartType chart_type) = 0;
};

using DetectorPtr = std::shared_ptr<Detector>;

/// Reads analytically known marks from a chart's ground-truth sidecar.
/// Line points become point-kind marks with a square region of side 2% of
/// the image's min dimension.
class SyntheticOracleDetector : public Detector {
 public:
  explicit SyntheticOracleDetector(chartgen::GroundTruth gt);
  std::string identity() const override { return "oracle"; }
  std::vector<DataMark> detect(const img::Image& image, core::ChartType chart_type) override;

 private:
  chartgen::GroundTruth gt_;
};

/// Adapts a detections JSON file produced by any external detector:
/// {"marks": [{"kind": "bar", "box": [x0,y0,x1,y1]}, ...]}.
class FileDetector : public Detector {
 public:
  explicit FileDetector(const std::string& detections_json_path);
  std::string identity() const override { return "detections-file"; }
  std::vector<DataMark> detect(const img::Image& image, core::ChartType chart_type) override;

 private:
  std::vector<DataMark> marks_;
};

/// Detected marks with unique ids 1..n in deterministic order
/// (left-to-right, then top-to-bottom by region centroid).
std::vector<DataMark> detect_marks(const img::Image& image, core::ChartType chart_type,
                                   Detector& detector);

/// The synthetic detector's marks, ordered and numbered, straight from a
/// ground-truth sidecar (no image needed; the sidecar carries dimensions).
std::vector<DataMark> oracle_marks_from_ground_truth(const chartgen::GroundTruth& gt);

/// Outlines each mark and stamps its numeric id on a contrasting circular
/// backplate at the region centroid. Dimensions match the input image.
img::Image annotate_marks(const img::Image& image, const std::vector<DataMark>& marks);

struct CellMarkAssignment {
  core::CellRef cell;
  int mark_id = 0;
};

struct MappingOutcome {
  std::vector<CellMarkAssignment> assignments;
  std::vector<core::CellRef> unmapped;
};

/// Asks the backend which labeled mark shows each cited cell. Assignments
/// naming unknown mark ids are dropped and their cells reported unmapped.
/// `feedback` carries a prior verification verdict on retries.
MappingOutcome map_cells_to_marks(llm::Gateway& gateway, llm::Backend& backend,
                                  const llm::ImagePart& annotated,
                                  const std::vector<DataMark>& marks,
                                  const std::vector<core::CellRef>& cited_cells,
                                  const core::DataTable& table, const core::Claim& claim,
                                  const std::string& feedback = "");

/// Oracle path: assign each cited cell the mark that carries it; no
/// backend involved. Cells without a carrying mark come back unmapped.
MappingOutcome map_cells_oracle(const std::vector<DataMark>& marks,
                                const std::vector<core::CellRef>& cited_cells);

ReflectionVerdict verify_localization(llm::Gateway& gateway, llm::Backend& backend,
                                      const llm::ImagePart& image,
                                      const std::vector<core::BBox>& boxes,
                                      const core::Claim& claim);

struct LocalizationResult {
  std::vector<CellMarkAssignment> assignments;
  std::vector<core::CellRef> unmapped;
  bool verified = false;
};

struct LocalizeOptions {
  bool use_oracle_mapping = false;
};

/// annotate -> map -> verify, with one retry of the mapping when the
/// verification verdict is inconsistent.
LocalizationResult localize_cells(llm::Gateway& gateway, llm::Backend& backend,
                                  const img::Image& chart,
                                  const llm::ImagePart& annotated,
                                  const std::vector<DataMark>& marks,
                                  const std::vector<core::CellRef>& cited_cells,
                                  const core::DataTable& table, const core::Claim& claim,
                                  const LocalizeOptions& opts = {});

/// Zero-shot baseline: prompt directly for normalized boxes. Inverted
/// coordinate pairs are swapped, out-of-range values clamped, irreparable
/// boxes dropped.
std::vector<core::BBox> direct_bbox_baseline(llm::Gateway& gateway, llm::Backend& backend,
                                             const llm::ImagePart& image,
                                             const core::Claim& claim);

}  // namespace chartattrib::agents
