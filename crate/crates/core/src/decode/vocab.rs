use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::corpus::DatasetTag;
use crate::{Error, Result};

pub const PAD_TOKEN: &str = "<pad>";
pub const BOS_TOKEN: &str = "<bos>";
pub const EOS_TOKEN: &str = "<eos>";

/// Token ↔ id mapping.
///
/// Ids 0, 1 and 2 are always `<pad>`, `<bos>` and `<eos>`. Task-embedding
/// tokens (`<bos_ac>`, `<bos_cl>`, ...) come next, then ordinary words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    tasks: BTreeMap<String, usize>,
}

fn task_name(token: &str) -> Option<&str> {
    token.strip_prefix("<bos_")?.strip_suffix('>')
}

impl Vocabulary {
    /// Words are sorted and deduplicated; task tokens follow `tasks` order.
    pub fn build<I, S>(words: I, tasks: &[DatasetTag]) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: BTreeSet<String> = words.into_iter().map(Into::into).collect();
        let mut tokens: Vec<String> = [PAD_TOKEN, BOS_TOKEN, EOS_TOKEN].map(String::from).into();
        let mut seen = HashSet::new();
        for task in tasks {
            if seen.insert(task.task_token()) {
                tokens.push(task.task_token());
            }
        }
        tokens.extend(words);
        Self::from_tokens(tokens)
    }

    /// Rebuild from the id-ordered token list, e.g. read from a checkpoint.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 3
            || tokens[0] != PAD_TOKEN
            || tokens[1] != BOS_TOKEN
            || tokens[2] != EOS_TOKEN
        {
            return Err(Error::InvalidArgument(
                "vocabulary must start with <pad>, <bos>, <eos>".into(),
            ));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        let mut tasks = BTreeMap::new();
        for (id, token) in tokens.iter().enumerate() {
            if token.is_empty() || token.contains(char::is_whitespace) {
                return Err(Error::InvalidArgument(format!("invalid token {token:?}")));
            }
            if index.insert(token.clone(), id).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate token {token}")));
            }
            if let Some(name) = task_name(token) {
                tasks.insert(name.to_string(), id);
            }
        }
        Ok(Vocabulary {
            tokens,
            index,
            tasks,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn pad_id(&self) -> usize {
        0
    }

    pub fn bos_id(&self) -> usize {
        1
    }

    pub fn eos_id(&self) -> usize {
        2
    }

    /// Begin-of-sentence or task-embedding token.
    pub fn is_start(&self, id: usize) -> bool {
        id == self.bos_id() || self.tasks.values().any(|&t| t == id)
    }

    pub fn is_special(&self, id: usize) -> bool {
        id == self.pad_id() || id == self.eos_id() || self.is_start(id)
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Result<&str> {
        self.tokens
            .get(id)
            .map(String::as_str)
            .ok_or(Error::UnknownToken(id))
    }

    /// Id of the task-embedding token for `task`.
    pub fn task_id(&self, task: &DatasetTag) -> Result<usize> {
        self.tasks
            .get(&task.name().to_lowercase())
            .copied()
            .ok_or_else(|| Error::UnknownTask(task.name().to_string()))
    }

    pub fn tasks(&self) -> impl Iterator<Item = DatasetTag> + '_ {
        self.tasks.keys().map(|name| DatasetTag::from(name.clone()))
    }

    /// Start id for a decode or training example.
    pub fn start_id(&self, task: Option<&DatasetTag>) -> Result<usize> {
        match task {
            Some(task) => self.task_id(task),
            None => Ok(self.bos_id()),
        }
    }

    pub fn encode<S: AsRef<str>>(&self, words: &[S]) -> Result<Vec<usize>> {
        words
            .iter()
            .map(|w| {
                let w = w.as_ref();
                self.id(w)
                    .filter(|&id| !self.is_special(id))
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!("word `{w}` is not in the vocabulary"))
                    })
            })
            .collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Result<Vec<String>> {
        ids.iter()
            .map(|&id| self.token(id).map(str::to_string))
            .collect()
    }

    /// Ids of the given words that exist in the vocabulary.
    pub fn ids_of<'a>(&self, words: impl IntoIterator<Item = &'a String>) -> BTreeSet<usize> {
        words.into_iter().filter_map(|w| self.id(w)).collect()
    }
}
