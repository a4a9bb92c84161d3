//! Shared signal-curve representation.

/// Which observable a curve reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// The signal itself at each sample time: cumulative absorbed count or
    /// instantaneous inside count.
    Level,
    /// The change between consecutive samples, indexed by the left endpoint.
    NetChange,
}

impl std::fmt::Display for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Observable::Level => write!(f, "level"),
            Observable::NetChange => write!(f, "net"),
        }
    }
}

/// Which slice of the transmitter field contributes to a signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// The single transmitter closest to the receiver (the desired signal).
    Nearest,
    /// Every transmitter except the nearest (the interfering signal).
    Interferers,
    /// The whole active field.
    All,
}

impl std::fmt::Display for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Component::Nearest => write!(f, "nearest"),
            Component::Interferers => write!(f, "aggregate"),
            Component::All => write!(f, "all"),
        }
    }
}

/// Time-indexed molecule counts with one standard-error band.
///
/// Analytic curves carry a zero band; sampled curves carry the standard
/// error of the mean across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalCurve {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
}

impl SignalCurve {
    pub fn exact(times: Vec<f64>, mean: Vec<f64>) -> Self {
        let std_error = vec![0.0; mean.len()];
        SignalCurve {
            times,
            mean,
            std_error,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Net change between consecutive samples: value[k] = mean[k+1] - mean[k],
    /// indexed by the left endpoint. Error bands add in quadrature.
    pub fn net_change(&self) -> SignalCurve {
        let n = self.times.len().saturating_sub(1);
        let mut times = Vec::with_capacity(n);
        let mut mean = Vec::with_capacity(n);
        let mut std_error = Vec::with_capacity(n);
        for k in 0..n {
            times.push(self.times[k]);
            mean.push(self.mean[k + 1] - self.mean[k]);
            std_error.push((self.std_error[k + 1].powi(2) + self.std_error[k].powi(2)).sqrt());
        }
        SignalCurve {
            times,
            mean,
            std_error,
        }
    }
}
