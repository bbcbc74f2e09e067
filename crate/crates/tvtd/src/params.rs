//! Flat parameter storage addressed by name or by [`ParamId`].

use crate::linalg::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamInfo {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub len: usize,
}

/// All tensors of a model in one contiguous buffer. Gradients and optimizer
/// moments use stores of the same layout, so updates are plain slice loops.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore<T> {
    infos: Vec<ParamInfo>,
    data: Vec<T>,
}

impl<T: Scalar> Default for ParamStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> ParamStore<T> {
    pub fn new() -> Self {
        Self {
            infos: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>, shape: &[usize]) -> ParamId {
        let name = name.into();
        assert!(self.find(&name).is_none(), "duplicate parameter {name}");
        let len = shape.iter().product();
        let offset = self.data.len();
        self.data.resize(offset + len, T::zero());
        self.infos.push(ParamInfo {
            name,
            shape: shape.to_vec(),
            offset,
            len,
        });
        ParamId(self.infos.len() - 1)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            infos: self.infos.clone(),
            data: vec![T::zero(); self.data.len()],
        }
    }

    pub fn get(&self, id: ParamId) -> &[T] {
        let info = &self.infos[id.0];
        &self.data[info.offset..info.offset + info.len]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut [T] {
        let info = &self.infos[id.0];
        &mut self.data[info.offset..info.offset + info.len]
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.infos.iter().position(|i| i.name == name).map(ParamId)
    }

    pub fn info(&self, id: ParamId) -> &ParamInfo {
        &self.infos[id.0]
    }

    pub fn infos(&self) -> &[ParamInfo] {
        &self.infos
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.infos.len()).map(ParamId)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Total number of scalars.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn fill(&mut self, value: T) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.infos == other.infos
    }
}
