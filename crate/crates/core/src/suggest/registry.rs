use std::collections::HashMap;
use std::sync::Arc;

use super::methods::{
    suggest_atm, suggest_atomic, suggest_fragment, suggest_metamap, suggest_semantic, suggest_umls,
};
use super::{Method, Resources, SuggestError, SuggestionGroup, SuggestionRequest};

/// A user-supplied method: keywords and loaded resources in, `(keyword group,
/// ranked uids)` pairs out.
pub type UserMethod = Arc<
    dyn Fn(&[String], &Resources) -> Result<Vec<(Vec<String>, Vec<String>)>, SuggestError>
        + Send
        + Sync,
>;

/// Routes requests to the built-in methods or to registered user methods.
#[derive(Clone, Default)]
pub struct MethodRegistry {
    user: HashMap<String, UserMethod>,
}

impl MethodRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(
        &mut self,
        name: &str,
        method: impl Fn(&[String], &Resources) -> Result<Vec<(Vec<String>, Vec<String>)>, SuggestError>
            + Send
            + Sync
            + 'static,
    ) -> Result<(), SuggestError> {
        let parsed: Method = name.parse()?;
        if parsed.is_builtin() || self.user.contains_key(name) {
            return Err(SuggestError::DuplicateRegistration(name.to_string()));
        }
        self.user.insert(name.to_string(), Arc::new(method));
        Ok(())
    }

    /// Whether `method` can be dispatched.
    pub fn resolves(&self, method: &Method) -> bool {
        match method {
            Method::User(name) => self.user.contains_key(name),
            _ => true,
        }
    }

    /// Every method name that [`MethodRegistry::dispatch`] accepts.
    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = Method::BUILTIN
            .iter()
            .map(|m| m.name().to_string())
            .collect();
        let mut user: Vec<String> = self.user.keys().cloned().collect();
        user.sort();
        names.extend(user);
        names
    }

    pub fn dispatch(
        &self,
        request: &SuggestionRequest,
        resources: &Resources,
    ) -> Result<Vec<SuggestionGroup>, SuggestError> {
        if !self.resolves(&request.method) {
            return Err(SuggestError::UnknownMethod(
                request.method.name().to_string(),
            ));
        }
        request.validate()?;
        let kw = &request.keywords;
        match &request.method {
            Method::Atm => suggest_atm(kw, resources),
            Method::MetaMap => suggest_metamap(kw, resources),
            Method::Umls => suggest_umls(kw, resources, request.depth),
            Method::AtomicBert => suggest_atomic(kw, resources, request.depth),
            Method::FragmentBert => {
                suggest_fragment(kw, resources, request.interpolation_depth, request.depth)
            }
            Method::SemanticBert => {
                suggest_semantic(kw, resources, request.interpolation_depth, request.depth)
            }
            Method::User(name) => {
                let f = &self.user[name];
                f(kw, resources)?
                    .into_iter()
                    .map(|(keywords, uids)| {
                        SuggestionGroup::from_uids(
                            keywords,
                            request.method.clone(),
                            uids.iter().map(String::as_str),
                            resources.vocab(),
                        )
                    })
                    .collect()
            }
        }
    }
}
