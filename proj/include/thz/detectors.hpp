// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#ifndef THZ_DETECTORS_HPP
#define THZ_DETECTORS_HPP

#include "thz/constellation.hpp"
#include "thz/flops.hpp"
#include "thz/numerics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace thz
{

enum class DetectorKind
{
    ML,
    NC,
    PNC,
    CD,
    PCD,
    LORD,
    SSD
};

inline constexpr DetectorKind kAllDetectors[] = {DetectorKind::ML,  DetectorKind::NC,   DetectorKind::PNC,
                                                 DetectorKind::CD,  DetectorKind::PCD,  DetectorKind::LORD,
                                                 DetectorKind::SSD};

std::string_view to_string(DetectorKind kind) noexcept;
DetectorKind parse_detector(std::string_view name); // InvalidArgument on unknown names

bool uses_wrd(DetectorKind kind) noexcept;        // PNC, PCD, SSD
bool uses_shifts(DetectorKind kind) noexcept;     // LORD, SSD

inline constexpr std::uint64_t kDefaultMlCap = std::uint64_t{1} << 20;

// One superposed stream. Empty `columns` means the trailing block of `size`
// SAs. Explicit columns are 0-based, strictly increasing, and end at N-1.
struct StreamSpec
{
    int size = 0;
    Constellation constellation{2, 1.0};
    std::vector<int> columns;
};

// Stream 1 (index 0) spans all N SAs and has the lowest power; later streams
// are smaller and strictly stronger. Detection runs from the last stream back
// to the first.
class StreamPlan
{
public:
    StreamPlan(int sa_count, std::vector<StreamSpec> streams);

    int sa_count() const noexcept { return n_; }
    std::size_t size() const noexcept { return streams_.size(); }
    const StreamSpec &stream(std::size_t i) const { return streams_.at(i); }
    const std::vector<int> &columns(std::size_t i) const { return columns_.at(i); }
    bool contiguous(std::size_t i) const;
    bool contiguous() const;
    double total_power() const noexcept;
    int bits(std::size_t i) const { return stream(i).size * stream(i).constellation.bits_per_symbol(); }

private:
    int n_;
    std::vector<StreamSpec> streams_;
    std::vector<std::vector<int>> columns_;
};

struct Candidate
{
    SymbolVector symbols;
    double distance = 0.0;
};

// Squared residuals under each detector family's native model.
double full_distance(const ComplexVector &y, const ComplexMatrix &h, std::span<const int> x, const Constellation &c);
double triangular_distance(const ComplexVector &yt, const ComplexMatrix &r, std::span<const int> x,
                           const Constellation &c, FlopCounter *counter = nullptr);
double punctured_distance(const ComplexVector &yb, const ComplexMatrix &rp, std::span<const int> x,
                          const Constellation &c, FlopCounter *counter = nullptr);

// Exhaustive argmin of ||y - H x||^2; the first minimum in lexicographic
// label order wins. Throws SearchSpaceTooLarge when L^S exceeds `cap`.
Candidate ml_search(const ComplexVector &y, const ComplexMatrix &h, const Constellation &c,
                    std::uint64_t cap = kDefaultMlCap);
SymbolVector detect_ml(const ComplexVector &y, const ComplexMatrix &h, const Constellation &c,
                       std::uint64_t cap = kDefaultMlCap);

SymbolVector detect_nc(const ComplexVector &yt, const ComplexMatrix &r, const Constellation &c,
                       FlopCounter *counter = nullptr);
SymbolVector detect_pnc(const ComplexVector &yb, const ComplexMatrix &rp, const Constellation &c,
                        FlopCounter *counter = nullptr);

// Root-layer candidate list. Every candidate is scored with the same distance
// routine, so the NC (resp. PNC) solution is always in the list.
Candidate detect_cd(const ComplexVector &yt, const ComplexMatrix &r, const Constellation &c,
                    FlopCounter *counter = nullptr);
Candidate detect_pcd(const ComplexVector &yb, const ComplexMatrix &rp, const Constellation &c,
                     FlopCounter *counter = nullptr);

// PNC/NC completion of the upper layers for a fixed root symbol.
SymbolVector back_substitute(const ComplexVector &yt, const ComplexMatrix &r, const Constellation &c, int root,
                             FlopCounter *counter = nullptr);
SymbolVector punctured_slice(const ComplexVector &yb, const ComplexMatrix &rp, const Constellation &c, int root,
                             FlopCounter *counter = nullptr);

// Left-cyclic shift for step t in [1, S]: columns t..S-1, 0..t-1 (0-based).
// The last (root) column of step t is original column t-1; step S is the
// identity ordering.
std::vector<int> shift_order(int size, int step);
ComplexMatrix cyclic_shift_columns(const ComplexMatrix &h, int step);
std::vector<QrFactors> shifted_qr(const ComplexMatrix &h, const DecompositionOptions &opts = {});
std::vector<WrFactors> shifted_wr(const ComplexMatrix &h, const DecompositionOptions &opts = {});

// x_hat[t-1] is the root decision of CD (LORD) or PCD (SSD) at step t.
SymbolVector detect_lord(const ComplexVector &y, std::span<const QrFactors> shifted, const Constellation &c,
                         FlopCounter *counter = nullptr);
SymbolVector detect_lord(const ComplexVector &y, const ComplexMatrix &h, const Constellation &c,
                         const DecompositionOptions &opts = {});
SymbolVector detect_ssd(const ComplexVector &y, std::span<const WrFactors> shifted, const Constellation &c,
                        FlopCounter *counter = nullptr);
SymbolVector detect_ssd(const ComplexVector &y, const ComplexMatrix &h, const Constellation &c,
                        const DecompositionOptions &opts = {});

// y - H x. Throws DimensionMismatch.
ComplexVector sic_cancel(const ComplexVector &y, const ComplexMatrix &h, const ComplexVector &x);

// Decompositions of one channel shared by every stream, SNR point and
// detector kind. Only what the requested kinds need is computed.
class ChannelFactors
{
public:
    static ChannelFactors prepare(const ComplexMatrix &h, const StreamPlan &plan, std::span<const DetectorKind> kinds,
                                  const DecompositionOptions &opts = {});

    const ComplexMatrix &h() const noexcept { return h_; }
    const QrFactors &qr() const;
    const WrFactors &wr() const;
    std::span<const QrFactors> lord(const std::vector<int> &columns) const;
    std::span<const WrFactors> ssd(const std::vector<int> &columns) const;

private:
    ComplexMatrix h_;
    std::optional<QrFactors> qr_;
    std::optional<WrFactors> wr_;
    std::map<std::vector<int>, std::vector<QrFactors>> lord_;
    std::map<std::vector<int>, std::vector<WrFactors>> ssd_;
};

struct StreamEstimate
{
    SymbolVector symbols;
    BitVector bits;
    double distance = 0.0;
};

// streams[i] belongs to plan stream i.
struct DetectionResult
{
    std::vector<StreamEstimate> streams;
};

DetectionResult detect_superposed(const ComplexVector &y, const ChannelFactors &factors, const StreamPlan &plan,
                                  DetectorKind kind, FlopCounter *counter = nullptr,
                                  std::uint64_t ml_cap = kDefaultMlCap);

// Instrumented cost of one detection on a random N x N Gaussian channel with
// `stream_count` equal-size streams of the given order.
ComplexityReport count_flops(DetectorKind kind, int n, int order, int stream_count, std::uint64_t seed = 1);

} // namespace thz

#endif
