//! Cardinalities, history access and the canonical tensor index order.
//!
//! Every table in the crate is flat and mixed-radix with types before
//! actions and player 1 most significant:
//! `idx = type_profile_index * action_profiles + action_profile_index`.

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};

pub(crate) fn decode_into(mut idx: usize, radices: &[usize], out: &mut [usize]) {
    for k in (0..radices.len()).rev() {
        out[k] = idx % radices[k];
        idx /= radices[k];
    }
}

pub(crate) fn encode(digits: &[usize], radices: &[usize]) -> usize {
    digits
        .iter()
        .zip(radices)
        .fold(0, |acc, (&d, &r)| acc * r + d)
}

/// Type and action cardinalities of an n-player scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    types: Vec<usize>,
    actions: Vec<usize>,
}

impl Shape {
    pub fn new(types: Vec<usize>, actions: Vec<usize>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::Shape("at least one player is required".into()));
        }
        if types.len() != actions.len() {
            return Err(Error::Shape(format!(
                "{} type cardinalities but {} action cardinalities",
                types.len(),
                actions.len()
            )));
        }
        if let Some(i) = types.iter().chain(&actions).position(|&c| c == 0) {
            return Err(Error::Shape(format!("cardinality {i} is zero")));
        }
        Ok(Self { types, actions })
    }

    /// Same cardinalities for every player.
    pub fn uniform(players: usize, types: usize, actions: usize) -> Result<Self> {
        Self::new(vec![types; players], vec![actions; players])
    }

    pub fn players(&self) -> usize {
        self.types.len()
    }

    pub fn types(&self) -> &[usize] {
        &self.types
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn type_profiles(&self) -> usize {
        self.types.iter().product()
    }

    pub fn action_profiles(&self) -> usize {
        self.actions.iter().product()
    }

    pub fn cells(&self) -> usize {
        self.type_profiles() * self.action_profiles()
    }

    pub fn cell(&self, type_profile: usize, action_profile: usize) -> usize {
        type_profile * self.action_profiles() + action_profile
    }

    pub fn type_index(&self, theta: &[usize]) -> usize {
        encode(theta, &self.types)
    }

    pub fn action_index(&self, a: &[usize]) -> usize {
        encode(a, &self.actions)
    }

    pub fn decode_types(&self, idx: usize, out: &mut [usize]) {
        decode_into(idx, &self.types, out)
    }

    pub fn decode_actions(&self, idx: usize, out: &mut [usize]) {
        decode_into(idx, &self.actions, out)
    }

    pub(crate) fn check_same(&self, other: &Shape, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::Shape(format!(
                "{what}: expected types {:?} actions {:?}, got types {:?} actions {:?}",
                self.types, self.actions, other.types, other.actions
            )));
        }
        Ok(())
    }
}

/// What one player observes of earlier actions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Window {
    /// The `m` most recent actions `(a_{i-1}, ..., a_{i-m})`.
    Depth(usize),
    /// An explicit list of earlier players (0-based), most recent first.
    Players(Vec<usize>),
}

/// Per-player history access. Equality compares the observed windows, so
/// `[0, 1]` and `[0, [0]]` are the same memory.
#[derive(Debug, Clone)]
pub struct Memory {
    entries: Vec<Window>,
    windows: Vec<Vec<usize>>,
}

impl Memory {
    pub fn new(entries: Vec<Window>) -> Self {
        let windows = entries
            .iter()
            .enumerate()
            .map(|(i, w)| match w {
                Window::Depth(m) => (1..=(*m).min(i)).map(|back| i - back).collect(),
                Window::Players(p) => p.clone(),
            })
            .collect();
        Self { entries, windows }
    }

    pub fn from_depths(depths: &[usize]) -> Self {
        Self::new(depths.iter().copied().map(Window::Depth).collect())
    }

    /// Nobody sees anything: the canonical (Bayesian) case.
    pub fn none(players: usize) -> Self {
        Self::from_depths(&vec![0; players])
    }

    /// Each player sees the immediately preceding action.
    pub fn chain(players: usize) -> Self {
        let depths: Vec<usize> = (0..players).map(|i| usize::from(i > 0)).collect();
        Self::from_depths(&depths)
    }

    /// Every later player sees player 1's action only.
    pub fn star(players: usize) -> Self {
        Self::new(
            (0..players)
                .map(|i| {
                    if i == 0 {
                        Window::Depth(0)
                    } else {
                        Window::Players(vec![0])
                    }
                })
                .collect(),
        )
    }

    pub fn players(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Window] {
        &self.entries
    }

    /// Observed earlier players of `player`, most recent first.
    pub fn window(&self, player: usize) -> &[usize] {
        &self.windows[player]
    }

    pub fn is_canonical(&self) -> bool {
        self.windows.iter().all(Vec::is_empty)
    }

    /// Depth vector when every entry is a depth window.
    pub fn depths(&self) -> Option<Vec<usize>> {
        self.entries
            .iter()
            .map(|w| match w {
                Window::Depth(m) => Some(*m),
                Window::Players(_) => None,
            })
            .collect()
    }

    /// Componentwise inclusion of the observed sets.
    pub fn is_subset_of(&self, other: &Memory) -> bool {
        self.players() == other.players()
            && self
                .windows
                .iter()
                .zip(&other.windows)
                .all(|(a, b)| a.iter().all(|p| b.contains(p)))
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (i, entry) in self.entries.iter().enumerate() {
            match entry {
                Window::Depth(m) if *m > i => {
                    out.push(Diagnostic::new("memory", format!("m_{} > {}", i + 1, i)));
                }
                Window::Depth(_) => {}
                Window::Players(p) => {
                    if let Some(&bad) = p.iter().find(|&&j| j >= i) {
                        out.push(Diagnostic::new(
                            "memory",
                            format!(
                                "player {} observes player {} which is not earlier",
                                i + 1,
                                bad + 1
                            ),
                        ));
                    }
                    let mut sorted = p.clone();
                    sorted.sort_unstable();
                    sorted.dedup();
                    if sorted.len() != p.len() {
                        out.push(Diagnostic::new(
                            "memory",
                            format!("player {} observes a player twice", i + 1),
                        ));
                    }
                }
            }
        }
        out
    }
}

impl PartialEq for Memory {
    fn eq(&self, other: &Self) -> bool {
        self.windows == other.windows
    }
}

impl Eq for Memory {}

impl Serialize for Memory {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Memory {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Vec::<Window>::deserialize(d).map(Memory::new)
    }
}

/// Cardinalities plus history access: a Bell scenario with outcome
/// communication, or equivalently the information structure of a
/// multistage game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellScenario {
    pub shape: Shape,
    pub memory: Memory,
}

impl BellScenario {
    pub fn new(shape: Shape, memory: Memory) -> Result<Self> {
        if memory.players() != shape.players() {
            return Err(Error::Shape(format!(
                "memory has {} entries for {} players",
                memory.players(),
                shape.players()
            )));
        }
        let diags = memory.validate();
        if !diags.is_empty() {
            return Err(Error::invalid("memory", diags));
        }
        Ok(Self { shape, memory })
    }

    pub fn players(&self) -> usize {
        self.shape.players()
    }

    /// Number of distinct (type, history) inputs of `player`.
    pub fn setting_count(&self, player: usize) -> usize {
        self.shape.types[player]
            * self
                .memory
                .window(player)
                .iter()
                .map(|&j| self.shape.actions[j])
                .product::<usize>()
    }

    /// Canonical setting index of `player` given its type and the realized
    /// actions (only the observed entries of `actions` are read).
    pub fn setting_index(&self, player: usize, ty: usize, actions: &[usize]) -> usize {
        self.memory
            .window(player)
            .iter()
            .fold(ty, |acc, &j| acc * self.shape.actions[j] + actions[j])
    }

    /// Inverse of [`setting_index`](Self::setting_index): the type and the
    /// observed actions in window order.
    pub fn decode_setting(&self, player: usize, setting: usize) -> (usize, Vec<usize>) {
        let window = self.memory.window(player);
        let radices: Vec<usize> = window.iter().map(|&j| self.shape.actions[j]).collect();
        let hist_count: usize = radices.iter().product();
        let mut hist = vec![0; radices.len()];
        decode_into(setting % hist_count, &radices, &mut hist);
        (setting / hist_count, hist)
    }

    /// Plays stages 1..n forward, asking `choose(player, setting)` for each
    /// action. Returns the realized action profile.
    pub fn play<F>(&self, theta: &[usize], actions: &mut [usize], mut choose: F)
    where
        F: FnMut(usize, usize) -> usize,
    {
        for i in 0..self.players() {
            let s = self.setting_index(i, theta[i], actions);
            actions[i] = choose(i, s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_windows_are_most_recent_first() {
        let m = Memory::from_depths(&[0, 1, 2]);
        assert_eq!(m.window(0), &[] as &[usize]);
        assert_eq!(m.window(1), &[0]);
        assert_eq!(m.window(2), &[1, 0]);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn too_deep_memory_is_diagnosed() {
        let d = Memory::from_depths(&[0, 2]).validate();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "m_2 > 1");
    }

    #[test]
    fn explicit_window_must_look_backwards() {
        let m = Memory::new(vec![Window::Depth(0), Window::Players(vec![1])]);
        assert_eq!(m.validate().len(), 1);
        assert!(Memory::star(3).validate().is_empty());
    }

    #[test]
    fn setting_index_round_trips() {
        let shape = Shape::new(vec![3, 2, 2], vec![2, 3, 2]).unwrap();
        let scen = BellScenario::new(shape, Memory::from_depths(&[0, 1, 2])).unwrap();
        assert_eq!(scen.setting_count(2), 2 * 3 * 2);
        let a = [1, 2, 0];
        let s = scen.setting_index(2, 1, &a);
        assert_eq!(scen.decode_setting(2, s), (1, vec![2, 1]));
    }

    #[test]
    fn canonical_cell_order_puts_types_first() {
        let shape = Shape::new(vec![3, 3], vec![2, 2]).unwrap();
        let t = shape.type_index(&[1, 2]);
        let a = shape.action_index(&[1, 0]);
        assert_eq!(t, 5);
        assert_eq!(a, 2);
        assert_eq!(shape.cell(t, a), 22);
    }

    #[test]
    fn memory_json_accepts_depths_and_lists() {
        let m: Memory = serde_json::from_str("[0, 1, [0]]").unwrap();
        assert_eq!(m, Memory::star(3));
        assert_eq!(serde_json::to_string(&Memory::chain(3)).unwrap(), "[0,1,1]");
    }
}
