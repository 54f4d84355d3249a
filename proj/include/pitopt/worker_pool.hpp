#pragma once

#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pitopt {

/// Persistent pool of worker threads with deterministic static task
/// assignment: task i of a batch always runs on worker i % size(). Sequential
/// reference solves are timed by submitting them as a single task to a
/// one-worker pool, so parallel and sequential runs share the same
/// infrastructure.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return static_cast<int>(threads_.size()); }

  /// Runs task(0..n_tasks-1) across the workers and blocks until all have
  /// finished. The first exception thrown by any task is rethrown here.
  void run(int n_tasks, const std::function<void(int)>& task);

 private:
  void worker_loop(int worker_index);

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable work_ready_;
  std::condition_variable batch_done_;

  const std::function<void(int)>* task_ = nullptr;
  int n_tasks_ = 0;
  unsigned long long epoch_ = 0;
  int workers_running_ = 0;
  std::exception_ptr first_error_;
  bool shutdown_ = false;
};

}  // namespace pitopt
