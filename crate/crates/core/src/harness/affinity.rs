//! Best-effort CPU pinning for the timed path.
//!
//! The timed loop is single-threaded; pinning it to the core it already
//! runs on stops the scheduler from migrating it mid-run, which tightens
//! timing variance. Failures are silent; pinning is an optimization of
//! measurement quality, never a correctness requirement.

#[cfg(target_os = "linux")]
pub use linux::pin_to_current_core;

#[cfg(not(target_os = "linux"))]
pub fn pin_to_current_core() -> Option<AffinityGuard> {
    None
}

#[cfg(not(target_os = "linux"))]
pub struct AffinityGuard;

#[cfg(target_os = "linux")]
mod linux {
    use std::mem;

    /// Restores the thread's previous affinity mask on drop.
    pub struct AffinityGuard {
        previous: libc::cpu_set_t,
    }

    impl Drop for AffinityGuard {
        fn drop(&mut self) {
            unsafe {
                libc::sched_setaffinity(0, mem::size_of::<libc::cpu_set_t>(), &self.previous);
            }
        }
    }

    /// Pins the calling thread to the core it currently runs on.
    pub fn pin_to_current_core() -> Option<AffinityGuard> {
        unsafe {
            let cpu = libc::sched_getcpu();
            if cpu < 0 {
                return None;
            }
            let mut previous: libc::cpu_set_t = mem::zeroed();
            if libc::sched_getaffinity(0, mem::size_of::<libc::cpu_set_t>(), &mut previous) != 0 {
                return None;
            }
            let mut pinned: libc::cpu_set_t = mem::zeroed();
            libc::CPU_SET(cpu as usize, &mut pinned);
            if libc::sched_setaffinity(0, mem::size_of::<libc::cpu_set_t>(), &pinned) != 0 {
                return None;
            }
            Some(AffinityGuard { previous })
        }
    }

}
