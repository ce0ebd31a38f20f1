use he_emulator::HeError;
use he_kernels::KernelError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HelbaError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("step {t}, {kernel}: {source}")]
    Kernel {
        t: usize,
        kernel: &'static str,
        #[source]
        source: KernelError,
    },
    #[error("step {t}: no arm clears the selection threshold {threshold}")]
    EmptySelection { t: usize, threshold: f64 },
    #[error("protocol error: {0}")]
    Protocol(String),
}

impl HelbaError {
    pub(crate) fn at(t: usize, kernel: &'static str) -> impl FnOnce(KernelError) -> HelbaError {
        move |source| HelbaError::Kernel { t, kernel, source }
    }

    pub(crate) fn he(t: usize, kernel: &'static str) -> impl FnOnce(HeError) -> HelbaError {
        move |e| HelbaError::Kernel {
            t,
            kernel,
            source: KernelError::He(e),
        }
    }
}
