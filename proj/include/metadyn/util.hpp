#pragma once

// Shared plumbing: a small persistent worker pool, round-trip decimal
// formatting for CSV output, and a SHA-256 for run manifests.
//
// Determinism contract used throughout the project: parallel_for(n, fn)
// guarantees fn(i) runs exactly once for each i, and each fn(i) writes only
// to its own output slot. Results are combined by the caller in index order,
// so the numbers produced never depend on the worker count.

#include <atomic>
#include <charconv>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace metadyn {

class WorkerPool {
public:
    static WorkerPool& instance() {
        static WorkerPool pool;
        return pool;
    }

    // n < 1 is clamped to 1 (serial, runs on the calling thread).
    void set_workers(int n) {
        std::unique_lock lk(config_mutex_);
        if (n < 1) n = 1;
        if (n == workers_ + 1) return;
        shutdown_threads();
        workers_ = n - 1;  // calling thread participates
        start_threads();
    }

    int workers() const { return workers_ + 1; }

    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
        if (n == 0) return;
        std::unique_lock lk(config_mutex_);
        if (workers_ == 0 || n == 1) {
            for (std::size_t i = 0; i < n; ++i) fn(i);
            return;
        }
        {
            std::lock_guard g(job_mutex_);
            job_fn_ = &fn;
            job_size_ = n;
            next_.store(0, std::memory_order_relaxed);
            worker_slots_ = static_cast<int>(std::min<std::size_t>(workers_, n - 1));
            active_ = worker_slots_ + 1;  // +1: the calling thread
            ++job_id_;
        }
        job_cv_.notify_all();
        run_tasks();  // calling thread works too
        std::unique_lock jk(job_mutex_);
        done_cv_.wait(jk, [&] { return active_ == 0; });
        job_fn_ = nullptr;
    }

    ~WorkerPool() { shutdown_threads(); }

private:
    WorkerPool() = default;

    void run_tasks() {
        const std::function<void(std::size_t)>* fn;
        std::size_t n;
        {
            std::lock_guard g(job_mutex_);
            fn = job_fn_;
            n = job_size_;
        }
        for (;;) {
            std::size_t i = next_.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) break;
            (*fn)(i);
        }
        std::lock_guard g(job_mutex_);
        if (--active_ == 0) done_cv_.notify_all();
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        for (;;) {
            {
                std::unique_lock lk(job_mutex_);
                job_cv_.wait(lk, [&] { return stop_ || (job_fn_ && job_id_ != seen && worker_slots_ > 0); });
                if (stop_) return;
                seen = job_id_;
                --worker_slots_;
            }
            run_tasks();
        }
    }

    void start_threads() {
        stop_ = false;
        for (int i = 0; i < workers_; ++i)
            threads_.emplace_back([this] { worker_loop(); });
    }

    void shutdown_threads() {
        {
            std::lock_guard g(job_mutex_);
            stop_ = true;
        }
        job_cv_.notify_all();
        for (auto& t : threads_) t.join();
        threads_.clear();
        stop_ = false;
    }

    std::mutex config_mutex_;
    int workers_ = 0;
    std::vector<std::thread> threads_;

    std::mutex job_mutex_;
    std::condition_variable job_cv_, done_cv_;
    const std::function<void(std::size_t)>* job_fn_ = nullptr;
    std::size_t job_size_ = 0;
    std::atomic<std::size_t> next_{0};
    int worker_slots_ = 0;
    int active_ = 0;
    std::uint64_t job_id_ = 0;
    bool stop_ = false;
};

inline void set_workers(int n) { WorkerPool::instance().set_workers(n); }
inline int worker_count() { return WorkerPool::instance().workers(); }

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    WorkerPool::instance().parallel_for(n, fn);
}

// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4), enough for file checksums in run manifests.

class Sha256 {
public:
    Sha256() { reset(); }

    void reset() {
        static constexpr std::uint32_t init[8] = {
            0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
            0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
        std::memcpy(h_, init, sizeof(h_));
        len_ = 0;
        buf_fill_ = 0;
    }

    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        len_ += n;
        while (n > 0) {
            std::size_t take = std::min<std::size_t>(64 - buf_fill_, n);
            std::memcpy(buf_ + buf_fill_, p, take);
            buf_fill_ += take;
            p += take;
            n -= take;
            if (buf_fill_ == 64) {
                compress(buf_);
                buf_fill_ = 0;
            }
        }
    }

    std::string hex_digest() {
        std::uint64_t bits = len_ * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (buf_fill_ != 56) update(&zero, 1);
        unsigned char lenbuf[8];
        for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
        // bypass len_ accounting for the trailer
        std::memcpy(buf_ + 56, lenbuf, 8);
        compress(buf_);
        static const char* hexd = "0123456789abcdef";
        std::string out(64, '0');
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 4; ++j) {
                unsigned char byte = static_cast<unsigned char>(h_[i] >> (24 - 8 * j));
                out[i * 8 + j * 2] = hexd[byte >> 4];
                out[i * 8 + j * 2 + 1] = hexd[byte & 0xf];
            }
        return out;
    }

    static std::string hash(const std::string& s) {
        Sha256 h;
        h.update(s.data(), s.size());
        return h.hex_digest();
    }

private:
    static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void compress(const unsigned char* block) {
        static constexpr std::uint32_t k[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
            0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
            0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
            0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
            0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
            0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
            0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
            0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
            0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
            0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
                   (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3];
        std::uint32_t e = h_[4], f = h_[5], g = h_[6], h = h_[7];
        for (int i = 0; i < 64; ++i) {
            std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t t1 = h + s1 + ch + k[i] + w[i];
            std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t t2 = s0 + maj;
            h = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        h_[0] += a; h_[1] += b; h_[2] += c; h_[3] += d;
        h_[4] += e; h_[5] += f; h_[6] += g; h_[7] += h;
    }

    std::uint32_t h_[8];
    std::uint64_t len_ = 0;
    unsigned char buf_[64];
    std::size_t buf_fill_ = 0;
};

}  // namespace metadyn
