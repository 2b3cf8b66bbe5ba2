//! Coarse peak-memory measurement for relative comparisons.
//!
//! Install [`PeakAlloc`] as the global allocator to get exact heap high-water marks:
//!
//! ```ignore
//! #[global_allocator]
//! static ALLOC: confrule::PeakAlloc = confrule::PeakAlloc;
//! ```
//!
//! Without it, Linux falls back to the process resident-set high-water mark (`VmHWM`), reset
//! through `/proc/self/clear_refs` before the run. Other platforms report nothing. Numbers are
//! only meaningful relative to another run in the same process and configuration.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);
static INSTALLED: AtomicBool = AtomicBool::new(false);
static MEASURING: Mutex<()> = Mutex::new(());

/// System allocator wrapper tracking live and peak heap bytes.
pub struct PeakAlloc;

fn grow(by: usize) {
    if !INSTALLED.load(Ordering::Relaxed) {
        INSTALLED.store(true, Ordering::Relaxed);
    }
    let now = CURRENT.fetch_add(by, Ordering::Relaxed) + by;
    PEAK.fetch_max(now, Ordering::Relaxed);
}

unsafe impl GlobalAlloc for PeakAlloc {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc(layout) };
        if !p.is_null() {
            grow(layout.size());
        }
        p
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc_zeroed(layout) };
        if !p.is_null() {
            grow(layout.size());
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        CURRENT.fetch_sub(layout.size(), Ordering::Relaxed);
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = unsafe { System.realloc(ptr, layout, new_size) };
        if !p.is_null() {
            if new_size >= layout.size() {
                grow(new_size - layout.size());
            } else {
                CURRENT.fetch_sub(layout.size() - new_size, Ordering::Relaxed);
            }
        }
        p
    }
}

/// Whether [`PeakAlloc`] is serving this process's allocations.
pub fn tracking_allocator_installed() -> bool {
    // Force at least one allocation through the global allocator.
    drop(std::hint::black_box(Box::new(0u8)));
    INSTALLED.load(Ordering::Relaxed)
}

/// Runs `f` and reports how far memory use rose above its starting level, in bytes.
///
/// Measurements are serialized against each other; allocations by unrelated threads running
/// at the same time are still counted.
pub fn measure_peak_memory<R>(f: impl FnOnce() -> R) -> (R, Option<u64>) {
    let _guard = MEASURING.lock().unwrap_or_else(|e| e.into_inner());
    if tracking_allocator_installed() {
        let base = CURRENT.load(Ordering::Relaxed);
        PEAK.store(base, Ordering::Relaxed);
        let out = f();
        let peak = PEAK.load(Ordering::Relaxed);
        (out, Some(peak.saturating_sub(base) as u64))
    } else {
        let base = reset_rss_peak();
        let out = f();
        let peak = rss_peak();
        (out, base.zip(peak).map(|(b, p)| p.saturating_sub(b)))
    }
}

#[cfg(target_os = "linux")]
fn status_kib(key: &str) -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|rest| rest.trim().trim_end_matches("kB").trim().parse::<u64>().ok())
        .map(|kib| kib * 1024)
}

#[cfg(target_os = "linux")]
fn reset_rss_peak() -> Option<u64> {
    std::fs::write("/proc/self/clear_refs", "5").ok()?;
    status_kib("VmRSS:")
}

#[cfg(target_os = "linux")]
fn rss_peak() -> Option<u64> {
    status_kib("VmHWM:")
}

#[cfg(not(target_os = "linux"))]
fn reset_rss_peak() -> Option<u64> {
    None
}

#[cfg(not(target_os = "linux"))]
fn rss_peak() -> Option<u64> {
    None
}
